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

#include <cmath>
#include <cstdint>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/gnn/params.hpp"

namespace sgr::train {

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  gnn::Params first_moment;
  gnn::Params second_moment;
  std::uint64_t step = 0;

  explicit AdamState(const gnn::Params& like)
      : first_moment(gnn::zeros_like(like)), second_moment(gnn::zeros_like(like)) {}
};

namespace detail {

template <typename F>
void zip_tensors(gnn::Params& params, const gnn::Params& grads, AdamState& state, F&& f) {
  std::vector<Matrix*> p;
  std::vector<const Matrix*> g;
  std::vector<Matrix*> m;
  std::vector<Matrix*> v;
  gnn::for_each_tensor(params, [&](Matrix& t) { p.push_back(&t); });
  gnn::for_each_tensor(grads, [&](const Matrix& t) { g.push_back(&t); });
  gnn::for_each_tensor(state.first_moment, [&](Matrix& t) { m.push_back(&t); });
  gnn::for_each_tensor(state.second_moment, [&](Matrix& t) { v.push_back(&t); });
  require(p.size() == g.size() && p.size() == m.size() && p.size() == v.size(), ErrorKind::ShapeMismatch,
          "optimizer tensors do not line up with parameters");
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i]->rows() == g[i]->rows() && p[i]->cols() == g[i]->cols() && p[i]->rows() == m[i]->rows() &&
                p[i]->cols() == m[i]->cols(),
            ErrorKind::ShapeMismatch, "gradient shape differs from parameter shape");
    f(*p[i], *g[i], *m[i], *v[i]);
  }
}

}  // namespace detail

/// One bias-corrected Adam update of every tensor in `params`.
inline void adam_step(gnn::Params& params, const gnn::Params& grads, AdamState& state, double lr) {
  require(gnn::kind_of(params) == gnn::kind_of(grads), ErrorKind::ShapeMismatch, "gradient model kind differs");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::kBeta2, t);
  detail::zip_tensors(params, grads, state, [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double gk = g.data()[k];
      double& mk = m.data()[k];
      double& vk = v.data()[k];
      mk = AdamState::kBeta1 * mk + (1.0 - AdamState::kBeta1) * gk;
      vk = AdamState::kBeta2 * vk + (1.0 - AdamState::kBeta2) * gk * gk;
      const double m_hat = mk / correction1;
      const double v_hat = vk / correction2;
      p.data()[k] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
    }
  });
}

}  // namespace sgr::train
