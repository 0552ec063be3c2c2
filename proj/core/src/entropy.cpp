// SPDX-License-Identifier: Apache-2.0
#include "adlm/entropy.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "adlm/error.hpp"

namespace adlm::entropy {

namespace {

constexpr double kResidualTolerance = 1e-9;
constexpr double kOrderTolerance = 1e-12;
constexpr std::uint64_t kResidualSlackQuanta =
    static_cast<std::uint64_t>(kResidualTolerance * static_cast<double>(kQuantaPerUnit));

__extension__ using int128 = __int128;

double residual_of(std::uint64_t cum_quanta) noexcept {
  return cum_quanta >= kQuantaPerUnit ? 0.0 : dequantize(kQuantaPerUnit - cum_quanta);
}

double plogp(double p) noexcept { return p > 0.0 ? p * std::log(p) : 0.0; }

// R ln(R / unlisted): the residual mass spread uniformly over `unlisted` tokens.
double residual_term(double residual, std::uint64_t unlisted) {
  if (residual <= 0.0) return 0.0;
  if (unlisted == 0) {
    if (residual > kResidualTolerance) {
      throw InvalidArgument("confidence: " + std::to_string(residual) +
                            " probability mass left but no unlisted tokens remain");
    }
    return 0.0;
  }
  return residual * std::log(residual / static_cast<double>(unlisted));
}

double log_vocab(const TokenDistribution& dist) {
  if (dist.vocab_size() < 2) {
    throw InvalidArgument("confidence: vocab_size must be at least 2 for normalization");
  }
  return std::log(static_cast<double>(dist.vocab_size()));
}

}  // namespace

double entropy(const TokenDistribution& dist) {
  double sum = 0.0;
  for (const auto& e : dist.entries()) sum += plogp(e.prob);
  sum += residual_term(dist.residual(), dist.vocab_size() - dist.size());
  return -sum;
}

double confidence(const TokenDistribution& dist) {
  const double lv = log_vocab(dist);
  return 1.0 - entropy(dist) / lv;
}

double conf_k(const TokenDistribution& dist, std::size_t k) {
  const double lv = log_vocab(dist);
  if (k > dist.size()) {
    throw InvalidArgument("conf_k: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(dist.size()) + " listed entries");
  }
  if (k == 0) return 0.0;
  double sum = 0.0;
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += plogp(dist[i].prob);
    cum += dist[i].quanta;
  }
  sum += residual_term(residual_of(cum), dist.vocab_size() - k);
  return 1.0 + sum / lv;
}

namespace {

// (1 + z) ln(1 + z) - z, accurate near 0 and exactly 0 at z == 0.
double excess(double z) noexcept {
  if (z <= -1.0) return 1.0;
  if (std::abs(z) < 1e-3) {
    const double z2 = z * z;
    return z2 * (0.5 - z / 6.0 + z2 / 12.0 - z2 * z / 20.0);
  }
  return (1.0 + z) * std::log1p(z) - z;
}

// ln|V| * (Conf_k - Conf_{k-1}) for a candidate of q quanta taken out of a
// residual of r quanta spread over n unlisted tokens. With u = r / n the
// change is u * (g(x) + (n - 1) g(y)), where p = u (1 + x), the remaining
// n - 1 tokens hold u (1 + y) each and x + (n - 1) y = 0. Both terms are
// non-negative, so the sign is exact; the direct difference of the two
// Conf values is not.
//
// When the candidate is the last unlisted token the residual is, by the same
// uniform completion, exactly its mass; quantization leaves at most rounding
// slack between the two, and the change is 0. Quantized entries may also
// overshoot unit mass by up to the slack; a candidate larger than the residual
// then takes all of it.
std::optional<double> scaled_delta(std::uint64_t q, std::uint64_t r, std::uint64_t n) {
  if (q > r) {
    if (q - r > kResidualSlackQuanta) return std::nullopt;
    q = r;
  }
  if (n == 1) {
    if (r - q <= kResidualSlackQuanta) return 0.0;
    return std::nullopt;
  }
  if (r == 0) return 0.0;
  const int128 gap = static_cast<int128>(q) * n - static_cast<int128>(r);
  const double u = dequantize(r) / static_cast<double>(n);
  if (gap == 0) return 0.0;
  const double x = static_cast<double>(gap) / static_cast<double>(r);
  const double y = -x / static_cast<double>(n - 1);
  return u * (excess(x) + static_cast<double>(n - 1) * excess(y));
}

DeltaStep advance(const ConfidenceState& state, double p, std::uint64_t q, const TokenDistribution& dist,
                  DeltaScale scale) {
  const double lv = log_vocab(dist);
  if (state.k > 0 && p > state.last_prob + kOrderTolerance) {
    throw InvalidArgument("delta_conf: candidate probability " + std::to_string(p) +
                          " exceeds the previously accepted " + std::to_string(state.last_prob));
  }
  if (state.k >= dist.vocab_size()) {
    throw InvalidArgument("delta_conf: pool already spans the whole vocabulary");
  }

  DeltaStep out;
  ConfidenceState& next = out.next;
  next.k = state.k + 1;
  next.cum_quanta = state.cum_quanta + q;
  next.cum_prob = dequantize(next.cum_quanta);
  next.cum_plogp = state.cum_plogp + plogp(p);
  next.last_prob = p;
  next.conf = 1.0 + (next.cum_plogp + residual_term(residual_of(next.cum_quanta), dist.vocab_size() - next.k)) / lv;

  const std::uint64_t residual_q = state.cum_quanta >= kQuantaPerUnit ? 0 : kQuantaPerUnit - state.cum_quanta;
  if (auto d = scaled_delta(q, residual_q, dist.vocab_size() - state.k)) {
    out.delta = *d / lv;
  } else {
    out.delta = next.conf - state.conf;
  }
  if (scale == DeltaScale::double_norm) out.delta /= lv;
  return out;
}

}  // namespace

DeltaStep delta_conf(const ConfidenceState& state, double next_prob, const TokenDistribution& dist,
                     DeltaScale scale) {
  if (!std::isfinite(next_prob) || next_prob < 0.0 || next_prob > 1.0) {
    throw InvalidArgument("delta_conf: probability must lie in [0, 1]");
  }
  const std::uint64_t q = quantize(next_prob);
  return advance(state, dequantize(q), q, dist, scale);
}

DeltaStep delta_conf(const ConfidenceState& state, const TokenProb& next, const TokenDistribution& dist,
                     DeltaScale scale) {
  return advance(state, next.prob, next.quanta, dist, scale);
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::threshold: return "threshold";
    case StopReason::max_pool_cap: return "max_pool_cap";
    case StopReason::distribution_exhausted: return "distribution_exhausted";
  }
  return "unknown";
}

namespace {

template <typename OnDelta>
CandidatePool truncate_impl(const TokenDistribution& dist, double epsilon, std::size_t max_pool,
                            DeltaScale scale, OnDelta&& on_delta) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("truncate: epsilon must be finite and non-negative");
  }
  if (max_pool == 0) throw InvalidArgument("truncate: max_pool must be at least 1");

  CandidatePool pool;
  const std::size_t limit = std::min(max_pool, dist.size());
  pool.tokens.reserve(limit);
  pool.probs.reserve(limit);

  ConfidenceState state;
  // The first candidate is unconditional.
  state = delta_conf(state, dist[0], dist, scale).next;
  pool.tokens.push_back(dist[0].token);
  pool.probs.push_back(dist[0].prob);

  for (std::size_t i = 1;; ++i) {
    if (i >= dist.size()) {
      pool.stop_reason = StopReason::distribution_exhausted;
      break;
    }
    if (i >= max_pool) {
      pool.stop_reason = StopReason::max_pool_cap;
      break;
    }
    auto step = delta_conf(state, dist[i], dist, scale);
    on_delta(step.delta);
    if (step.delta < epsilon) {
      pool.stop_reason = StopReason::threshold;
      pool.rejected_delta = step.delta;
      break;
    }
    state = step.next;
    pool.tokens.push_back(dist[i].token);
    pool.probs.push_back(dist[i].prob);
  }
  pool.conf = state.conf;
  return pool;
}

}  // namespace

CandidatePool truncate(const TokenDistribution& dist, double epsilon, std::size_t max_pool, DeltaScale scale) {
  return truncate_impl(dist, epsilon, max_pool, scale, [](double) {});
}

CandidatePool truncate_traced(const TokenDistribution& dist, double epsilon, std::size_t max_pool,
                              DeltaScale scale, std::vector<double>& deltas) {
  deltas.clear();
  return truncate_impl(dist, epsilon, max_pool, scale, [&](double d) { deltas.push_back(d); });
}

EntropyBounds entropy_bounds_for_log_vocab(double conf_min, double conf_max, double log_vocab) {
  if (!(conf_min > 0.0 && conf_min < conf_max && conf_max <= 1.0)) {
    throw InvalidArgument("entropy_bounds: require 0 < conf_min < conf_max <= 1");
  }
  if (!(log_vocab > 0.0) || !std::isfinite(log_vocab)) {
    throw InvalidArgument("entropy_bounds: ln|V| must be positive");
  }
  EntropyBounds b;
  b.alpha = conf_min;
  b.beta = conf_max;
  b.h_min = conf_min * log_vocab;
  b.h_max = conf_max * log_vocab;
  return b;
}

EntropyBounds entropy_bounds(double conf_min, double conf_max, std::uint64_t vocab_size) {
  if (vocab_size < 2) throw InvalidArgument("entropy_bounds: vocab_size must be at least 2");
  auto b = entropy_bounds_for_log_vocab(conf_min, conf_max, std::log(static_cast<double>(vocab_size)));
  b.vocab_size = vocab_size;
  return b;
}

}  // namespace adlm::entropy
