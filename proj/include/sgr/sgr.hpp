/*
 * Copyright 2026 The sgretrieve Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header.

#include "sgr/error.hpp"
#include "sgr/eval/agreement.hpp"
#include "sgr/eval/baselines.hpp"
#include "sgr/eval/ndcg.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/model.hpp"
#include "sgr/gnn/params.hpp"
#include "sgr/gnn/propagation.hpp"
#include "sgr/io/binary.hpp"
#include "sgr/io/vector_file.hpp"
#include "sgr/linalg.hpp"
#include "sgr/pipeline.hpp"
#include "sgr/ranking.hpp"
#include "sgr/relevance.hpp"
#include "sgr/retrieval.hpp"
#include "sgr/rng.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/synthetic.hpp"
#include "sgr/train/adam.hpp"
#include "sgr/train/checkpoint.hpp"
#include "sgr/train/config.hpp"
#include "sgr/train/sampler.hpp"
#include "sgr/train/trainer.hpp"
#include "sgr/word_vectors.hpp"
