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

#include "xir/losses.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace xir {

namespace {

void check_positive_columns(const Matrix& scores, std::span<const Index> positive_columns) {
  XIR_CHECK(static_cast<Eigen::Index>(positive_columns.size()) == scores.rows(),
            "one positive column per score row is required");
  for (Index c : positive_columns) {
    XIR_CHECK(c >= 0 && c < scores.cols(), "positive column out of range");
  }
}

// Softmax cross-entropy of one row of logits with a designated positive.
// Writes d(loss)/d(logit) into grad_row and returns the loss.
double row_softmax(const double* logits, Eigen::Index width, Index positive,
                   double* grad_row, double* positive_coeff) {
  const Eigen::Map<const Eigen::ArrayXd> x(logits, width);
  Eigen::Map<Eigen::ArrayXd> g(grad_row, width);
  const double max = x.maxCoeff();
  g = (x - max).exp();
  const double sum = g.sum();
  const double lse = max + std::log(sum);
  g /= sum;
  *positive_coeff = grad_row[positive] - 1.0;
  grad_row[positive] -= 1.0;
  return lse - logits[positive];
}

struct ResampledTerm {
  double loss;
  double positive_coeff;
};

// Per-row buffers reused across rows. `counts` is all-zero between calls.
struct TermScratch {
  std::vector<double> counts;
  std::vector<Index> distinct;
  Eigen::ArrayXd values;
  Eigen::ArrayXd weights;
};

// Accumulates `weight` times the resampled-term gradient into the row
// pointers and returns the term's value. Draws are folded into per-column
// counts so each distinct column's exponential is taken once.
ResampledTerm resampled_term(double positive_score, const double* pool_row, Eigen::Index width,
                             const ResampleSet& set, double weight, double* positive_grad,
                             double* pool_grad, TermScratch& scratch) {
  XIR_CHECK(set.size() > 0, "resampled set must not be empty");
  if (static_cast<Eigen::Index>(scratch.counts.size()) < width) scratch.counts.resize(width, 0.0);
  scratch.distinct.clear();
  for (Index pos : set.positions) {
    XIR_CHECK(pos >= 0 && pos < width, "resampled position out of range");
    if (scratch.counts[pos] == 0.0) scratch.distinct.push_back(pos);
    scratch.counts[pos] += 1.0;
  }
  const auto k = static_cast<Eigen::Index>(scratch.distinct.size());
  scratch.values.resize(k);
  scratch.weights.resize(k);
  for (Eigen::Index d = 0; d < k; ++d) {
    const Index pos = scratch.distinct[d];
    scratch.values[d] = pool_row[pos];
    scratch.weights[d] = scratch.counts[pos];
    scratch.counts[pos] = 0.0;
  }
  const double max = std::max(positive_score, scratch.values.maxCoeff());
  scratch.values = (scratch.values - max).exp() * scratch.weights;
  const double positive_exp = std::exp(positive_score - max);
  const double denom = positive_exp + scratch.values.sum();
  if (!std::isfinite(denom)) throw RuntimeAbort("non-finite score in resampled loss");
  const double log_denom = max + std::log(denom);
  ResampledTerm term{log_denom - positive_score, positive_exp / denom - 1.0};
  if (weight != 0.0) {
    *positive_grad += weight * term.positive_coeff;
    const double scale = weight / denom;
    for (Eigen::Index d = 0; d < k; ++d) pool_grad[scratch.distinct[d]] += scale * scratch.values[d];
  }
  return term;
}

double mean_loss(const LossBatchOutput& out, double rows) {
  double total = 0.0;
  for (double l : out.row_loss) total += l;
  return total / rows;
}

void scale_output(LossBatchOutput& out, double rows) {
  out.loss = mean_loss(out, rows);
  out.grad_scores /= rows;
}

}  // namespace

LossBatchOutput full_softmax_loss(const Matrix& scores, std::span<const Index> positives) {
  if (scores.cols() > kFullSoftmaxLimit) {
    throw ValidationError("full softmax is an oracle: corpus of " +
                          std::to_string(scores.cols()) + " items exceeds the limit of " +
                          std::to_string(kFullSoftmaxLimit));
  }
  std::vector<double> no_correction(scores.cols(), 0.0);
  return sampled_softmax_loss(scores, positives, no_correction);
}

LossBatchOutput sampled_softmax_loss(const Matrix& scores,
                                     std::span<const Index> positive_columns,
                                     std::span<const double> log_proposal) {
  check_positive_columns(scores, positive_columns);
  XIR_CHECK(static_cast<Eigen::Index>(log_proposal.size()) == scores.cols(),
            "one log proposal per candidate column is required");
  LossBatchOutput out;
  out.grad_scores.resize(scores.rows(), scores.cols());
  out.positive_coeff.resize(scores.rows());
  out.row_loss.resize(scores.rows());
  std::vector<double> logits(scores.cols());
  for (Eigen::Index a = 0; a < scores.rows(); ++a) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      logits[j] = scores(a, j) - log_proposal[j];
      if (!std::isfinite(logits[j])) {
        throw RuntimeAbort("non-finite corrected logit at row " + std::to_string(a) +
                           ", column " + std::to_string(j));
      }
    }
    out.row_loss[a] = row_softmax(logits.data(), scores.cols(), positive_columns[a],
                                  &out.grad_scores(a, 0), &out.positive_coeff[a]);
  }
  scale_output(out, static_cast<double>(scores.rows()));
  return out;
}

LossBatchOutput bir_loss(const Matrix& scores, std::span<const Index> positive_columns,
                         std::span<const ResampleSet> resampled) {
  check_positive_columns(scores, positive_columns);
  XIR_CHECK(static_cast<Eigen::Index>(resampled.size()) == scores.rows(),
            "one resampled set per row is required");
  LossBatchOutput out;
  out.grad_scores = Matrix::Zero(scores.rows(), scores.cols());
  out.positive_coeff.resize(scores.rows());
  out.row_loss.resize(scores.rows());
  TermScratch scratch;
  const double rows = static_cast<double>(scores.rows());
  for (Eigen::Index a = 0; a < scores.rows(); ++a) {
    const Index p = positive_columns[a];
    double positive_grad = 0.0;
    const auto term = resampled_term(scores(a, p), &scores(a, 0), scores.cols(), resampled[a],
                                     1.0 / rows, &positive_grad, &out.grad_scores(a, 0), scratch);
    out.grad_scores(a, p) += positive_grad;
    out.positive_coeff[a] = term.positive_coeff;
    out.row_loss[a] = term.loss;
  }
  out.loss = mean_loss(out, rows);
  return out;
}

LossBatchOutput xir_loss(const Matrix& scores, const Matrix& cache_scores,
                         std::span<const Index> positive_columns,
                         std::span<const ResampleSet> batch_resampled,
                         std::span<const ResampleSet> cache_resampled, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  check_positive_columns(scores, positive_columns);
  XIR_CHECK(cache_scores.rows() == scores.rows(), "cache scores must have one row per pair");
  const Eigen::Index rows = scores.rows();
  const bool use_cache = lambda != 0.0;
  const bool use_batch = lambda != 1.0;
  if (use_batch) {
    XIR_CHECK(static_cast<Eigen::Index>(batch_resampled.size()) == rows,
              "one batch-resampled set per row is required");
  }
  if (use_cache) {
    XIR_CHECK(static_cast<Eigen::Index>(cache_resampled.size()) == rows,
              "one cache-resampled set per row is required");
  }

  LossBatchOutput out;
  out.grad_scores = Matrix::Zero(rows, scores.cols());
  out.grad_cache_scores = Matrix::Zero(rows, cache_scores.cols());
  out.positive_coeff.assign(rows, 0.0);
  out.row_loss.assign(rows, 0.0);
  TermScratch scratch;
  const double n = static_cast<double>(rows);
  for (Eigen::Index a = 0; a < rows; ++a) {
    const Index p = positive_columns[a];
    const double sp = scores(a, p);
    double positive_grad = 0.0;
    if (use_cache) {
      const auto term = resampled_term(sp, &cache_scores(a, 0), cache_scores.cols(),
                                       cache_resampled[a], lambda / n, &positive_grad,
                                       &out.grad_cache_scores(a, 0), scratch);
      out.row_loss[a] += lambda * term.loss;
      out.positive_coeff[a] += lambda * term.positive_coeff;
    }
    if (use_batch) {
      const double w = 1.0 - lambda;
      const auto term = resampled_term(sp, &scores(a, 0), scores.cols(), batch_resampled[a], w / n,
                                       &positive_grad, &out.grad_scores(a, 0), scratch);
      out.row_loss[a] += w * term.loss;
      out.positive_coeff[a] += w * term.positive_coeff;
    }
    out.grad_scores(a, p) += positive_grad;
  }
  out.loss = mean_loss(out, n);
  return out;
}

}  // namespace xir
