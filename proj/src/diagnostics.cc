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

#include "xir/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xir/sampling.h"

namespace xir {
namespace {

void check_distribution(std::span<const double> p, const char* name) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValidationError(std::string(name) + " has a negative or non-finite entry");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError(std::string(name) + " does not sum to 1");
  }
}

std::vector<double> normalized_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

// Inverse-CDF draw over unnormalised running sums.
Index draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<Index>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                     static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

std::vector<double> cdf_of(std::span<const double> weights) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  return cdf;
}

void check_popularity(const PopularityTable& pop, Index n) {
  if (pop.size() != n) throw ValidationError("popularity length does not match the corpus");
  for (double p : pop.prob) {
    if (!(p > 0.0)) throw ValidationError("popularity must be strictly positive");
  }
}

constexpr Index kOracleLimit = 10000;

}  // namespace

DistributionReport tv_and_kl(std::span<const double> empirical, std::span<const double> exact) {
  if (empirical.size() != exact.size()) throw LogicError("distribution lengths differ");
  check_distribution(empirical, "empirical distribution");
  check_distribution(exact, "exact distribution");
  DistributionReport r;
  r.support_size = exact.size();
  double tv = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    tv += std::abs(empirical[i] - exact[i]);
    if (empirical[i] > 0.0) {
      const double q = std::max(exact[i], 1e-12);
      kl += empirical[i] * std::log(empirical[i] / q);
    }
  }
  r.tv_distance = std::clamp(0.5 * tv, 0.0, 1.0);
  r.kl_divergence = std::max(kl, 0.0);
  return r;
}

DistributionReport verify_lemma31(std::span<const double> p, std::uint64_t draws, Rng& rng,
                                  std::uint64_t pool_size) {
  if (p.empty()) throw ValidationError("distribution is empty");
  if (draws == 0) throw ValidationError("draws must be positive");
  for (double x : p) {
    if (!(x > 0.0)) throw ValidationError("distribution must be strictly positive");
  }
  if (pool_size == 0) pool_size = draws;
  const std::vector<double> stage_one = cdf_of(p);
  std::vector<std::uint64_t> pool(p.size(), 0);
  for (std::uint64_t t = 0; t < pool_size; ++t) ++pool[draw_from_cdf(stage_one, rng)];

  std::vector<double> weights(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) weights[i] = static_cast<double>(pool[i]) / p[i];
  const std::vector<double> stage_two = cdf_of(weights);
  std::vector<std::uint64_t> counts(p.size(), 0);
  for (std::uint64_t t = 0; t < draws; ++t) ++counts[draw_from_cdf(stage_two, rng)];

  const std::vector<double> uniform(p.size(), 1.0 / static_cast<double>(p.size()));
  DistributionReport r = tv_and_kl(normalized_counts(counts, draws), uniform);
  r.sample_count = draws;
  return r;
}

std::vector<BatchSizeReport> verify_theorem31(std::span<const double> scores,
                                              const PopularityTable& pop,
                                              std::span<const Index> batch_sizes,
                                              std::uint64_t trials, Rng& rng) {
  const Index n = static_cast<Index>(scores.size());
  if (n == 0) throw ValidationError("scores are empty");
  if (n > kOracleLimit) throw ValidationError("corpus too large for the exact softmax oracle");
  if (trials == 0) throw ValidationError("trials must be positive");
  check_popularity(pop, n);
  const std::vector<double> target = softmax(scores);
  const std::vector<double> pop_cdf = cdf_of(pop.prob);
  std::vector<double> corrected(n);
  for (Index i = 0; i < n; ++i) corrected[i] = scores[i] - pop.log_prob[i];

  std::vector<BatchSizeReport> out;
  for (Index b : batch_sizes) {
    if (b < 1) throw ValidationError("batch sizes must be positive");
    Rng local(derive_seed({rng.next_u64(), static_cast<std::uint64_t>(b)}));
    std::vector<std::uint64_t> counts(n, 0);
    std::vector<Index> batch(b);
    std::vector<double> cdf(b);
    for (std::uint64_t t = 0; t < trials; ++t) {
      double top = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < b; ++j) {
        batch[j] = draw_from_cdf(pop_cdf, local);
        top = std::max(top, corrected[batch[j]]);
      }
      double running = 0.0;
      for (Index j = 0; j < b; ++j) {
        running += std::exp(corrected[batch[j]] - top);
        cdf[j] = running;
      }
      ++counts[batch[draw_from_cdf(cdf, local)]];
    }
    DistributionReport r = tv_and_kl(normalized_counts(counts, trials), target);
    r.sample_count = trials;
    out.push_back({b, r});
  }
  return out;
}

BoundTerms compute_bound_terms(std::span<const double> scores, std::span<const double> pop,
                               std::span<const Index> batch, double coordinate_bound) {
  if (batch.empty()) throw ValidationError("batch is empty");
  if (pop.size() != scores.size()) throw ValidationError("popularity length does not match scores");
  BoundTerms t;
  for (double s : scores) t.Z += std::exp(s);
  double sum_ep = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i : batch) {
    const double e = std::exp(scores[i]);
    t.Z_B += e;
    t.Z_Bp += e / pop[i];
    sum_ep += e * pop[i];
    lo = std::min(lo, pop[i]);
    hi = std::max(hi, pop[i]);
  }
  // Pairwise form of sum_ep * Z_Bp - Z_B^2; exactly zero for equal popularities.
  double pairwise = 0.0;
  for (std::size_t a = 0; a < batch.size(); ++a) {
    const double pa = pop[batch[a]];
    const double ea = std::exp(scores[batch[a]]);
    for (std::size_t c = a + 1; c < batch.size(); ++c) {
      const double pc = pop[batch[c]];
      if (pa == pc) continue;
      const double gap = pa - pc;
      pairwise += ea * std::exp(scores[batch[c]]) * gap * gap / (pa * pc);
    }
  }
  const double size = static_cast<double>(batch.size());
  t.G = coordinate_bound;
  t.max_pop_gap = hi - lo;
  t.lead_grad_term = pairwise / (size * t.Z * t.Z * t.Z);
  t.lead_const_term = (2.0 * t.G / size) * t.max_pop_gap * t.Z_Bp * t.Z_B /
                      (t.Z * t.Z + sum_ep * t.Z_Bp);
  if (!std::isfinite(t.Z) || !std::isfinite(t.Z_Bp) || !std::isfinite(t.lead_grad_term)) {
    throw RuntimeAbort("bound terms overflowed; scores are too large");
  }
  return t;
}

GradientBiasReport gradient_bias(const TwoTowerModel& model, Index user, Index positive,
                                 const PopularityTable& pop, Index batch_size,
                                 std::uint64_t trials, Rng& rng,
                                 const GradientBiasOptions& options) {
  const Index n = model.num_items();
  if (n > kOracleLimit) throw ValidationError("corpus too large for the exact softmax oracle");
  if (user < 0 || user >= model.num_users()) throw ValidationError("user out of range");
  if (positive < 0 || positive >= n) throw ValidationError("positive item out of range");
  if (trials < 2) throw ValidationError("at least two trials are required");
  check_popularity(pop, n);
  const Index b = options.enumerate_batch ? n : batch_size;
  if (b < 1) throw ValidationError("batch size must be positive");
  const Index m = options.resample_size > 0 ? options.resample_size : b;

  const Matrix items = model.all_item_representations();
  const std::vector<Index> query_ids{user};
  const Vector query = model.encode_users(query_ids).row(0).transpose();
  const Index k = static_cast<Index>(query.size());
  std::vector<double> scores(n);
  Eigen::Map<Vector>(scores.data(), n).noalias() = items * query;
  const std::vector<double> target = softmax(scores);

  std::vector<double> correction(n);
  for (Index i = 0; i < n; ++i) {
    correction[i] = options.enumerate_batch ? scores[i] : scores[i] - pop.log_prob[i];
  }
  const std::vector<double> pop_cdf = cdf_of(pop.prob);

  std::vector<double> item_sum(n, 0.0), item_sq(n, 0.0);
  Vector user_sum = Vector::Zero(k), user_sq = Vector::Zero(k), x(k);
  std::vector<std::uint32_t> hits(n, 0);
  std::vector<Index> touched;
  std::vector<Index> batch(b), first_batch;
  std::vector<double> cdf(b);
  const double inv_m = 1.0 / static_cast<double>(m);

  for (std::uint64_t t = 0; t < trials; ++t) {
    double top = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < b; ++j) {
      batch[j] = options.enumerate_batch ? j : draw_from_cdf(pop_cdf, rng);
      top = std::max(top, correction[batch[j]]);
    }
    if (t == 0) first_batch = batch;
    double running = 0.0;
    for (Index j = 0; j < b; ++j) {
      running += std::exp(correction[batch[j]] - top);
      cdf[j] = running;
    }
    touched.clear();
    for (Index r = 0; r < m; ++r) {
      const Index item = batch[draw_from_cdf(cdf, rng)];
      if (hits[item]++ == 0) touched.push_back(item);
    }
    x.setZero();
    for (Index item : touched) {
      const double c = hits[item] * inv_m;
      item_sum[item] += c;
      item_sq[item] += c * c;
      x.noalias() += c * items.row(item).transpose();
      hits[item] = 0;
    }
    user_sum += x;
    user_sq += x.cwiseProduct(x);
  }

  const double count = static_cast<double>(trials);
  GradientBiasReport report;
  report.batch_size = b;
  report.resample_size = m;
  report.trials = trials;
  Vector delta(n);
  double item_se = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mean = item_sum[i] / count;
    delta[i] = mean - target[i];
    const double var = std::max(item_sq[i] / count - mean * mean, 0.0);
    item_se = std::max(item_se, std::sqrt(var / count));
  }
  report.item_bias = delta * query.transpose();
  report.user_bias = items.transpose() * delta;
  const double query_max = query.cwiseAbs().maxCoeff();
  report.max_abs_bias =
      std::max(report.item_bias.cwiseAbs().maxCoeff(), report.user_bias.cwiseAbs().maxCoeff());
  double user_se = 0.0;
  for (Index d = 0; d < k; ++d) {
    const double mean = user_sum[d] / count;
    const double var = std::max(user_sq[d] / count - mean * mean, 0.0);
    user_se = std::max(user_se, std::sqrt(var / count));
  }
  report.max_standard_error = std::max(item_se * query_max, user_se);

  double coordinate_bound = query_max;
  for (Index i : first_batch) {
    coordinate_bound = std::max(coordinate_bound, items.row(i).cwiseAbs().maxCoeff());
  }
  const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
  report.bounds = compute_bound_terms(scores, options.enumerate_batch ? uniform : pop.prob,
                                      first_batch, coordinate_bound);
  return report;
}

PopularityTable zipf_popularity(Index n, double exponent) {
  if (n < 1) throw ValidationError("corpus size must be positive");
  std::vector<double> weights(n);
  for (Index i = 0; i < n; ++i) weights[i] = std::pow(static_cast<double>(i + 1), -exponent);
  return popularity_from_counts(weights, 0.0);
}

std::vector<double> normal_scores(Index n, Rng& rng) {
  std::vector<double> s(n);
  for (auto& x : s) x = rng.normal();
  return s;
}

TwoTowerModel bias_instance(Index n, Index dim, double scale, bool uniform_scores,
                            std::uint64_t seed) {
  if (n < 1 || dim < 1) throw ValidationError("corpus size and dimension must be positive");
  TwoTowerModel model(1, n, dim, std::nullopt, seed);
  const double bound = scale / std::sqrt(static_cast<double>(dim));
  Rng rng(derive_seed({seed, 7}));
  for (Index i = 0; i < n; ++i) {
    for (Index d = 0; d < dim; ++d) model.item_embeddings()(i, d) = bound * (2.0 * rng.uniform() - 1.0);
  }
  for (Index d = 0; d < dim; ++d) {
    model.user_embeddings()(0, d) = uniform_scores ? 0.0 : bound * (2.0 * rng.uniform() - 1.0);
  }
  return model;
}

nlohmann::json to_json(const DistributionReport& r) {
  return {{"tv_distance", r.tv_distance},
          {"kl_divergence", r.kl_divergence},
          {"sample_count", r.sample_count},
          {"support_size", r.support_size}};
}

nlohmann::json to_json(const BoundTerms& b) {
  return {{"Z", b.Z},
          {"Z_B", b.Z_B},
          {"Z_Bp", b.Z_Bp},
          {"lead_grad_term", b.lead_grad_term},
          {"lead_const_term", b.lead_const_term},
          {"G", b.G},
          {"max_pop_gap", b.max_pop_gap}};
}

nlohmann::json to_json(std::span<const BatchSizeReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row = to_json(r.report);
    row["batch_size"] = r.batch_size;
    out.push_back(row);
  }
  return out;
}

nlohmann::json to_json(const GradientBiasReport& r) {
  std::vector<double> user(r.user_bias.data(), r.user_bias.data() + r.user_bias.size());
  return {{"batch_size", r.batch_size},
          {"resample_size", r.resample_size},
          {"trials", r.trials},
          {"max_abs_bias", r.max_abs_bias},
          {"max_standard_error", r.max_standard_error},
          {"user_bias", user},
          {"bound_terms", to_json(r.bounds)}};
}

}  // namespace xir
