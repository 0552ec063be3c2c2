// SPDX-License-Identifier: Apache-2.0
#include "adlm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "adlm/error.hpp"

namespace adlm {

namespace {

// Slack on total listed mass: 1e-9 expressed in quanta.
constexpr std::uint64_t kMassSlackQuanta =
    static_cast<std::uint64_t>(1e-9 * static_cast<double>(kQuantaPerUnit));

bool ranks_before(const TokenProb& a, const TokenProb& b) noexcept {
  if (a.quanta != b.quanta) return a.quanta > b.quanta;
  return a.token < b.token;
}

}  // namespace

std::uint64_t quantize(double p) noexcept {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return kQuantaPerUnit;
  return static_cast<std::uint64_t>(std::nearbyint(std::ldexp(p, kQuantumBits)));
}

double TokenDistribution::residual() const noexcept {
  if (listed_quanta_ >= kQuantaPerUnit) return 0.0;
  return dequantize(kQuantaPerUnit - listed_quanta_);
}

TokenDistribution TokenDistribution::make(std::uint64_t vocab_size,
                                          std::span<const std::pair<TokenId, double>> entries,
                                          std::size_t top_n) {
  if (vocab_size == 0) throw InvalidArgument("distribution: vocab_size must be positive");
  if (top_n == 0) throw InvalidArgument("distribution: top_n must be positive");

  TokenDistribution d;
  d.vocab_size_ = vocab_size;
  d.entries_.reserve(entries.size());
  for (const auto& [token, p] : entries) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidArgument("distribution: probability of token " + std::to_string(token) +
                            " is not a finite non-negative number");
    }
    const std::uint64_t q = quantize(p);
    if (q == 0) continue;
    d.entries_.push_back({token, dequantize(q), q});
  }
  if (d.entries_.empty()) throw InvalidArgument("distribution: no entries with positive probability");

  if (!std::is_sorted(d.entries_.begin(), d.entries_.end(), ranks_before)) {
    std::sort(d.entries_.begin(), d.entries_.end(), ranks_before);
  }
  if (d.entries_.size() > 1) {
    std::unordered_set<TokenId> seen;
    seen.reserve(d.entries_.size() * 2);
    for (const auto& e : d.entries_) {
      if (!seen.insert(e.token).second) {
        throw InvalidArgument("distribution: duplicate token id " + std::to_string(e.token));
      }
    }
  }

  std::uint64_t total = 0;
  for (const auto& e : d.entries_) total += e.quanta;
  if (total > kQuantaPerUnit + kMassSlackQuanta) {
    throw InvalidArgument("distribution: listed probabilities sum to more than 1");
  }
  if (d.entries_.size() > top_n) {
    d.entries_.resize(top_n);
    total = 0;
    for (const auto& e : d.entries_) total += e.quanta;
  }
  if (vocab_size < d.entries_.size()) {
    throw InvalidArgument("distribution: vocab_size " + std::to_string(vocab_size) +
                          " is smaller than the number of entries");
  }
  d.listed_quanta_ = total;
  return d;
}

}  // namespace adlm
