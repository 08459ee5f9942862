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

#ifndef XIR_METRICS_H_
#define XIR_METRICS_H_

#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "xir/common.h"
#include "xir/data.h"
#include "xir/model.h"

namespace xir {

// Binary-relevance NDCG@k. Returns nullopt when `relevant` is empty (such
// users are skipped rather than scored as zero).
std::optional<double> ndcg_at_k(std::span<const Index> ranked,
                                const std::unordered_set<Index>& relevant, int k);

// |top-k ∩ relevant| / |relevant|; nullopt for an empty relevant set.
std::optional<double> recall_at_k(std::span<const Index> ranked,
                                  const std::unordered_set<Index>& relevant, int k);

// Top-k item ids by descending score; ties go to the lower item id. Items
// with score -inf are never returned.
std::vector<Index> top_k(std::span<const double> scores, int k);

struct CutoffMetrics {
  int k = 0;
  double ndcg = 0.0;
  double recall = 0.0;
};

struct EvaluationResult {
  std::vector<CutoffMetrics> cutoffs;
  std::size_t users_evaluated = 0;

  const CutoffMetrics& at(int k) const;
};

// Full-ranking evaluation: every test user scores all N items, items seen in
// train are masked, and metrics are averaged over users with test items.
EvaluationResult evaluate_model(const TwoTowerModel& model, const InteractionStore& train,
                                const InteractionStore& test, std::span<const int> cutoffs);

// Same protocol for an arbitrary score source: score_fn(user) returns the
// length-N score vector for that user.
template <typename ScoreFn>
EvaluationResult evaluate_scores(ScoreFn&& score_fn, const InteractionStore& train,
                                 const InteractionStore& test, std::span<const int> cutoffs);

namespace internal {
EvaluationResult evaluate_ranked(
    const InteractionStore& train, const InteractionStore& test, std::span<const int> cutoffs,
    const std::function<void(Index, std::vector<double>&)>& fill_scores);
}  // namespace internal

template <typename ScoreFn>
EvaluationResult evaluate_scores(ScoreFn&& score_fn, const InteractionStore& train,
                                 const InteractionStore& test, std::span<const int> cutoffs) {
  return internal::evaluate_ranked(train, test, cutoffs,
                                   [&](Index user, std::vector<double>& out) { out = score_fn(user); });
}

}  // namespace xir

#endif  // XIR_METRICS_H_
