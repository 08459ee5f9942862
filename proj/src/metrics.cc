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

#include "xir/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace xir {

std::optional<double> ndcg_at_k(std::span<const Index> ranked,
                                const std::unordered_set<Index>& relevant, int k) {
  if (k < 1) throw ValidationError("cutoff must be at least 1");
  if (relevant.empty()) return std::nullopt;
  const std::size_t depth = std::min<std::size_t>(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (relevant.count(ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  const std::size_t ideal = std::min<std::size_t>(k, relevant.size());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

std::optional<double> recall_at_k(std::span<const Index> ranked,
                                  const std::unordered_set<Index>& relevant, int k) {
  if (k < 1) throw ValidationError("cutoff must be at least 1");
  if (relevant.empty()) return std::nullopt;
  const std::size_t depth = std::min<std::size_t>(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) hits += relevant.count(ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

std::vector<Index> top_k(std::span<const double> scores, int k) {
  std::vector<Index> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] != -std::numeric_limits<double>::infinity()) idx.push_back(static_cast<Index>(i));
  }
  const auto better = [&](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  const std::size_t depth = std::min<std::size_t>(std::max(k, 0), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + depth, idx.end(), better);
  idx.resize(depth);
  return idx;
}

const CutoffMetrics& EvaluationResult::at(int k) const {
  for (const auto& c : cutoffs) {
    if (c.k == k) return c;
  }
  throw LogicError("cutoff " + std::to_string(k) + " was not evaluated");
}

namespace internal {

EvaluationResult evaluate_ranked(
    const InteractionStore& train, const InteractionStore& test, std::span<const int> cutoffs,
    const std::function<void(Index, std::vector<double>&)>& fill_scores) {
  if (cutoffs.empty()) throw ValidationError("at least one cutoff is required");
  for (int k : cutoffs) {
    if (k < 1) throw ValidationError("cutoffs must be positive");
  }
  const int max_k = *std::max_element(cutoffs.begin(), cutoffs.end());
  EvaluationResult result;
  for (int k : cutoffs) result.cutoffs.push_back({k, 0.0, 0.0});

  std::vector<double> scores;
  std::unordered_set<Index> relevant;
  for (Index u = 0; u < test.num_users(); ++u) {
    const auto test_range = test.user_range(u);
    if (test_range.empty()) continue;
    relevant.clear();
    for (const auto& p : test_range) relevant.insert(p.item_id);
    fill_scores(u, scores);
    if (u < train.num_users()) {
      for (const auto& p : train.user_range(u)) {
        scores.at(p.item_id) = -std::numeric_limits<double>::infinity();
      }
    }
    const auto ranked = top_k(scores, max_k);
    for (auto& c : result.cutoffs) {
      c.ndcg += *ndcg_at_k(ranked, relevant, c.k);
      c.recall += *recall_at_k(ranked, relevant, c.k);
    }
    ++result.users_evaluated;
  }
  if (result.users_evaluated > 0) {
    for (auto& c : result.cutoffs) {
      c.ndcg /= static_cast<double>(result.users_evaluated);
      c.recall /= static_cast<double>(result.users_evaluated);
    }
  }
  return result;
}

}  // namespace internal

EvaluationResult evaluate_model(const TwoTowerModel& model, const InteractionStore& train,
                                const InteractionStore& test, std::span<const int> cutoffs) {
  if (test.num_items() > model.num_items() || test.num_users() > model.num_users()) {
    throw ValidationError("test data has more users or items than the model");
  }
  const Matrix items = model.all_item_representations();
  const Matrix& users = model.user_embeddings();
  return internal::evaluate_ranked(train, test, cutoffs, [&](Index u, std::vector<double>& out) {
    out.resize(items.rows());
    Eigen::Map<Vector>(out.data(), items.rows()).noalias() = items * users.row(u).transpose();
  });
}

}  // namespace xir
