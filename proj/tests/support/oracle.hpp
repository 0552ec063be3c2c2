// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference evaluations used by the tests. Nothing here calls
// into adlm::entropy; everything is recomputed from the raw probabilities.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "adlm/distribution.hpp"

namespace adlm::testing {

/// Probabilities of a distribution in rank order, as long double.
std::vector<long double> probs_of(const TokenDistribution& d);

/// Conf_k by direct evaluation in long double.
long double oracle_conf_k(const std::vector<long double>& p, std::uint64_t vocab, std::size_t k);

/// Conf_k for every k in [0, p.size()] in one pass (prefix sums, long double).
std::vector<long double> oracle_conf_all(const std::vector<long double>& p, std::uint64_t vocab);

/// Same evaluation in 50-digit decimal arithmetic; returned as long double.
long double mp_conf_k(const std::vector<double>& p, std::uint64_t vocab, std::size_t k);

/// Entropy (nats) with the uniform-residual completion, long double.
long double oracle_entropy(const std::vector<long double>& p, std::uint64_t vocab);

/// Symmetric Dirichlet(alpha) sample over `n` entries, unsorted.
std::vector<std::pair<TokenId, double>> dirichlet(std::size_t n, double alpha, std::mt19937_64& rng);

/// Zipf(s) probabilities over `n` entries, normalized over `n`.
std::vector<std::pair<TokenId, double>> zipf(std::size_t n, double s);

/// A random distribution for property tests: Dirichlet or Zipf shape,
/// |V| in [2, max_vocab], sometimes truncated to a top-N view.
TokenDistribution random_distribution(std::mt19937_64& rng, std::uint64_t max_vocab = 1024);

}  // namespace adlm::testing
