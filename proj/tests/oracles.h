// Copyright 2026 The XIR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XIR_TESTS_ORACLES_H_
#define XIR_TESTS_ORACLES_H_

// Slow, direct reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "xir/model.h"
#include "xir/objective.h"

namespace xir::oracle {

inline double ndcg(const std::vector<Index>& ranked, const std::vector<Index>& relevant, int k) {
  auto is_rel = [&](Index i) {
    return std::find(relevant.begin(), relevant.end(), i) != relevant.end();
  };
  double dcg = 0.0;
  for (int r = 1; r <= k && r <= static_cast<int>(ranked.size()); ++r) {
    if (is_rel(ranked[r - 1])) dcg += 1.0 / std::log2(r + 1.0);
  }
  double idcg = 0.0;
  for (int r = 1; r <= std::min<int>(k, relevant.size()); ++r) idcg += 1.0 / std::log2(r + 1.0);
  return dcg / idcg;
}

inline double recall(const std::vector<Index>& ranked, const std::vector<Index>& relevant, int k) {
  int hits = 0;
  for (int r = 0; r < k && r < static_cast<int>(ranked.size()); ++r) {
    hits += std::count(relevant.begin(), relevant.end(), ranked[r]) > 0;
  }
  return static_cast<double>(hits) / relevant.size();
}

inline std::vector<double> softmax(std::span<const double> s) {
  std::vector<double> p(s.size());
  double z = 0.0;
  for (double x : s) z += std::exp(x);
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = std::exp(s[i]) / z;
  return p;
}

// -s_p + log sum_j exp(s_j), averaged over rows.
inline double full_softmax(const Matrix& s, std::span<const Index> positives) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) z += std::exp(s(a, j));
    total += -s(a, positives[a]) + std::log(z);
  }
  return total / s.rows();
}

inline double sampled_softmax(const Matrix& s, std::span<const Index> cols,
                              std::span<const double> log_q) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) z += std::exp(s(a, j) - log_q[j]);
    total += -(s(a, cols[a]) - log_q[cols[a]]) + std::log(z);
  }
  return total / s.rows();
}

inline double resampled_row(double sp, const double* row, const ResampleSet& set) {
  double z = std::exp(sp);
  for (Index pos : set.positions) z += std::exp(row[pos]);
  return -std::log(std::exp(sp) / z);
}

inline double bir(const Matrix& s, std::span<const Index> cols, std::span<const ResampleSet> r) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    total += resampled_row(s(a, cols[a]), &s(a, 0), r[a]);
  }
  return total / s.rows();
}

inline double xir(const Matrix& s, const Matrix& c, std::span<const Index> cols,
                  std::span<const ResampleSet> r, std::span<const ResampleSet> k, double lambda) {
  double total = 0.0;
  for (Eigen::Index a = 0; a < s.rows(); ++a) {
    const double sp = s(a, cols[a]);
    total += lambda * resampled_row(sp, &c(a, 0), k[a]) +
             (1.0 - lambda) * resampled_row(sp, &s(a, 0), r[a]);
  }
  return total / s.rows();
}

// Every trainable scalar of a model, in a fixed order.
inline std::vector<double*> parameters(TwoTowerModel& m) {
  std::vector<double*> out;
  auto add = [&](auto& mat) {
    for (Eigen::Index i = 0; i < mat.size(); ++i) out.push_back(mat.data() + i);
  };
  add(m.user_embeddings());
  add(m.item_embeddings());
  for (auto& t : m.feature_tables()) add(t);
  for (auto& l : m.tower().layers()) {
    add(l.weight);
    add(l.bias);
  }
  return out;
}

// Analytic gradient laid out like parameters().
inline std::vector<double> flatten(const TwoTowerModel& m, const ModelGradients& g) {
  std::vector<double> out;
  auto add_rows = [&](const RowGradient& rg, const Matrix& like) {
    Matrix dense = Matrix::Zero(like.rows(), like.cols());
    for (std::size_t s = 0; s < rg.num_rows(); ++s) dense.row(rg.row_id(s)) = rg.slot_values(s);
    out.insert(out.end(), dense.data(), dense.data() + dense.size());
  };
  add_rows(g.user, m.user_embeddings());
  add_rows(g.item, m.item_embeddings());
  for (std::size_t f = 0; f < m.feature_tables().size(); ++f) {
    add_rows(g.features[f], m.feature_tables()[f]);
  }
  for (std::size_t l = 0; l < m.tower().layers().size(); ++l) {
    const auto& w = g.tower.weight[l];
    const auto& b = g.tower.bias[l];
    out.insert(out.end(), w.data(), w.data() + w.size());
    out.insert(out.end(), b.data(), b.data() + b.size());
  }
  return out;
}

// Max relative error between the analytic gradient and central differences.
inline double max_gradient_error(TwoTowerModel model, const BatchPlan& plan, double h = 1e-5) {
  const ObjectiveValue value = evaluate_objective(model, plan, true);
  const std::vector<double> analytic = flatten(model, value.grads);
  const std::vector<double*> params = parameters(model);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = evaluate_objective(model, plan, false).loss;
    *params[i] = saved - h;
    const double down = evaluate_objective(model, plan, false).loss;
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace xir::oracle

#endif  // XIR_TESTS_ORACLES_H_
