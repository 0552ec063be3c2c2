// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace adlm {

using TokenId = std::uint32_t;

/// Probabilities are snapped to integer multiples of 2^-48 on ingestion so
/// that sender and receiver do bit-identical arithmetic.
inline constexpr int kQuantumBits = 48;
inline constexpr std::uint64_t kQuantaPerUnit = std::uint64_t{1} << kQuantumBits;

/// Rounds `p` to the nearest multiple of 2^-48 and returns the multiplier.
/// Values outside [0, 1] are clamped first; NaN is rejected by the caller.
std::uint64_t quantize(double p) noexcept;

/// Inverse of quantize(): exact for every representable quantum count.
inline double dequantize(std::uint64_t quanta) noexcept {
  return static_cast<double>(quanta) / static_cast<double>(kQuantaPerUnit);
}

struct TokenProb {
  TokenId token = 0;
  double prob = 0.0;
  std::uint64_t quanta = 0;  ///< prob == dequantize(quanta)

  friend bool operator==(const TokenProb&, const TokenProb&) = default;
};

/// One step's next-token distribution. Entries are strictly ordered by
/// (prob descending, token id ascending); they may be a top-N view of a larger
/// vocabulary, in which case the unlisted mass is the residual.
class TokenDistribution {
 public:
  /// Quantizes, drops entries that quantize to zero, sorts, optionally keeps
  /// only the first `top_n`, and validates. Throws InvalidArgument on empty
  /// input, vocab_size == 0, vocab_size < entry count, duplicate token ids,
  /// non-finite or negative probabilities, or total mass above 1 + 1e-9.
  static TokenDistribution make(std::uint64_t vocab_size,
                                std::span<const std::pair<TokenId, double>> entries,
                                std::size_t top_n = std::numeric_limits<std::size_t>::max());

  std::uint64_t vocab_size() const noexcept { return vocab_size_; }
  std::span<const TokenProb> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const TokenProb& operator[](std::size_t i) const { return entries_[i]; }

  /// Listed mass in quanta (exact).
  std::uint64_t listed_quanta() const noexcept { return listed_quanta_; }
  /// 1 - listed mass, clamped to [0, 1].
  double residual() const noexcept;

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;

 private:
  TokenDistribution() = default;

  std::uint64_t vocab_size_ = 0;
  std::vector<TokenProb> entries_;
  std::uint64_t listed_quanta_ = 0;
};

}  // namespace adlm
