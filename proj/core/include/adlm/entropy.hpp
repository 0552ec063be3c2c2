// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "adlm/distribution.hpp"

/// Entropy, normalized confidence and confidence-driven pool truncation.
///
/// All quantities are in nats. A listed distribution may be a top-N view; the
/// unlisted mass R is treated as spread uniformly over the |V| - k tokens that
/// are not listed, which is the maximum-uncertainty completion of the view.
namespace adlm::entropy {

/// -sum p ln p of the distribution completed with a uniform residual.
/// Result lies in [0, ln |V|].
double entropy(const TokenDistribution& dist);

/// 1 - entropy / ln|V|. Requires vocab_size >= 2.
double confidence(const TokenDistribution& dist);

/// Confidence of the partially revealed distribution after the k most
/// probable entries are known and the rest of the mass is uniform:
///
///   1 + (sum_{i<=k} p_i ln p_i + R_k ln(R_k / (|V| - k))) / ln|V|,
///   R_k = 1 - sum_{i<=k} p_i.
///
/// conf_k(d, 0) == 0. Throws InvalidArgument when k exceeds the listed entries
/// or when k == |V| while unlisted mass remains.
double conf_k(const TokenDistribution& dist, std::size_t k);

/// How ΔConf is scaled. `single` is Conf_k - Conf_{k-1}; `double_norm`
/// additionally divides by ln|V| for compatibility with the alternative scale.
enum class DeltaScale { single, double_norm };

/// Running sums for incremental Conf_k evaluation.
struct ConfidenceState {
  std::size_t k = 0;
  double cum_prob = 0.0;        ///< sum_{i<=k} p_i
  double cum_plogp = 0.0;       ///< sum_{i<=k} p_i ln p_i
  double conf = 0.0;            ///< Conf_k
  std::uint64_t cum_quanta = 0; ///< exact listed mass behind cum_prob
  double last_prob = 1.0;       ///< p_k, for the ordering check
};

/// Result of admitting one more token into the pool.
struct DeltaStep {
  double delta = 0.0;  ///< ΔConf, scaled per DeltaScale
  ConfidenceState next;
};

/// Advances `state` by one candidate of probability `next_prob` in O(1).
/// `next_prob` may be 0 (an absent candidate) but must not exceed the previous
/// accepted probability; violations throw InvalidArgument.
DeltaStep delta_conf(const ConfidenceState& state, double next_prob, const TokenDistribution& dist,
                     DeltaScale scale = DeltaScale::single);

/// Quantum-exact variant used by truncate(); `next` must be the k-th entry.
DeltaStep delta_conf(const ConfidenceState& state, const TokenProb& next, const TokenDistribution& dist,
                     DeltaScale scale = DeltaScale::single);

enum class StopReason { threshold, max_pool_cap, distribution_exhausted };

std::string_view to_string(StopReason r) noexcept;

/// The retained candidates for one generation step, in rank order.
struct CandidatePool {
  std::vector<TokenId> tokens;
  std::vector<double> probs;
  StopReason stop_reason = StopReason::distribution_exhausted;
  double conf = 0.0;           ///< Conf_k of the retained pool
  double rejected_delta = 0.0; ///< ΔConf of the first excluded token (threshold stops only)

  std::size_t size() const noexcept { return tokens.size(); }
};

/// Moves the most probable remaining token into the pool until the next
/// token's ΔConf falls strictly below `epsilon`, the pool reaches `max_pool`,
/// or the listed entries run out. The first token is always accepted.
CandidatePool truncate(const TokenDistribution& dist, double epsilon, std::size_t max_pool,
                       DeltaScale scale = DeltaScale::single);

/// Same as truncate() but records the ΔConf of every evaluated candidate
/// (including the rejected one, if any) into `deltas`.
CandidatePool truncate_traced(const TokenDistribution& dist, double epsilon, std::size_t max_pool,
                              DeltaScale scale, std::vector<double>& deltas);

/// Entropy band derived from a confidence band.
struct EntropyBounds {
  double alpha = 0.0;
  double beta = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  std::uint64_t vocab_size = 0;

  bool contains(double h) const noexcept { return h >= h_min && h <= h_max; }
};

/// alpha = conf_min, beta = conf_max, h = conf * ln(vocab_size).
/// Requires 0 < conf_min < conf_max <= 1 and vocab_size >= 2.
EntropyBounds entropy_bounds(double conf_min, double conf_max, std::uint64_t vocab_size);

/// Same mapping with ln|V| supplied directly; lets callers work with a
/// non-integer effective vocabulary.
EntropyBounds entropy_bounds_for_log_vocab(double conf_min, double conf_max, double log_vocab);

}  // namespace adlm::entropy
