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

#ifndef XIR_LOSSES_H_
#define XIR_LOSSES_H_

#include <span>
#include <vector>

#include "xir/common.h"
#include "xir/sampling.h"

namespace xir {

// Loss value and gradients with respect to the score matrices. Rows are the
// batch pairs; columns of grad_scores are candidate-pool entries and columns
// of grad_cache_scores are cache slots. All values are mean-reduced over rows.
struct LossBatchOutput {
  double loss = 0.0;
  Matrix grad_scores;
  Matrix grad_cache_scores;
  // Per-row coefficient on the positive score's gradient (before the 1/B
  // mean factor). Lies in (-1, 0].
  std::vector<double> positive_coeff;
  // Per-row negative log-likelihood terms.
  std::vector<double> row_loss;
};

// Exact softmax over all N items: scores is B x N, positives are item ids.
// Guarded at N <= kFullSoftmaxLimit.
inline constexpr Index kFullSoftmaxLimit = 50000;
LossBatchOutput full_softmax_loss(const Matrix& scores, std::span<const Index> positives);

// Sampled softmax over a candidate pool with corrected logits
//   s'(u,j) = s(u,j) - log_proposal[j].
// Row a's positive sits at pool column positive_columns[a] and enters the
// denominator once; every other column is a negative.
LossBatchOutput sampled_softmax_loss(const Matrix& scores,
                                     std::span<const Index> positive_columns,
                                     std::span<const double> log_proposal);

// Resampled softmax: for row a with positive score s_p and resampled pool
// columns R_a (with multiplicity),
//   loss_a = -log( e^{s_p} / (e^{s_p} + sum_{j in R_a} e^{s_j}) ).
// Resampled scores enter uncorrected.
LossBatchOutput bir_loss(const Matrix& scores, std::span<const Index> positive_columns,
                         std::span<const ResampleSet> resampled);

// lambda * L(K) + (1 - lambda) * L(R). K positions index cache_scores
// columns; the positive score always comes from `scores`. A term whose
// weight is zero is skipped entirely.
LossBatchOutput xir_loss(const Matrix& scores, const Matrix& cache_scores,
                         std::span<const Index> positive_columns,
                         std::span<const ResampleSet> batch_resampled,
                         std::span<const ResampleSet> cache_resampled, double lambda);

}  // namespace xir

#endif  // XIR_LOSSES_H_
