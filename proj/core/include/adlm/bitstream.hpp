// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adlm {

/// Bit sequence with a read cursor. Bits are stored one per byte (0 or 1).
class Bitstream {
 public:
  Bitstream() = default;

  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t cursor() const noexcept { return cursor_; }
  std::size_t remaining() const noexcept { return bits_.size() - cursor_; }
  bool exhausted() const noexcept { return cursor_ == bits_.size(); }
  std::uint8_t bit(std::size_t i) const { return bits_.at(i); }

  /// Appends the low `width` bits of `value`, most significant first.
  void append(std::uint64_t value, unsigned width);
  /// Reads `width` bits (<= 64) at the cursor as a big-endian integer.
  /// Throws InvalidArgument if fewer remain.
  std::uint64_t read(unsigned width);
  /// Value of bits [begin, begin + width) without moving the cursor.
  std::uint64_t peek(std::size_t begin, unsigned width) const;

  friend bool operator==(const Bitstream& a, const Bitstream& b) { return a.bits_ == b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t cursor_ = 0;
};

inline constexpr unsigned kDefaultHeaderBits = 32;

/// header_bits-wide big-endian payload bit length, then the payload bytes
/// MSB first. header_bits must be 16 or 32; the payload bit length must be
/// below 2^header_bits.
Bitstream frame_message(std::span<const std::uint8_t> payload, unsigned header_bits = kDefaultHeaderBits);

/// Throws InvalidArgument unless a payload of `payload_bits` fits a header of
/// `header_bits`. Returns the framed length.
std::uint64_t framed_length(std::uint64_t payload_bits, unsigned header_bits);

/// Inverse of frame_message(). Throws InvalidArgument when the stream is
/// shorter than its header claims, longer, or not whole bytes.
std::vector<std::uint8_t> unframe_message(const Bitstream& framed, unsigned header_bits = kDefaultHeaderBits);

}  // namespace adlm
