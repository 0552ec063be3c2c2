// SPDX-License-Identifier: Apache-2.0
#include "adlm/bitstream.hpp"

#include <string>

#include "adlm/error.hpp"

namespace adlm {

void Bitstream::append(std::uint64_t value, unsigned width) {
  if (width > 64) throw InvalidArgument("bitstream: width above 64");
  for (unsigned i = width; i-- > 0;) bits_.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
}

std::uint64_t Bitstream::peek(std::size_t begin, unsigned width) const {
  if (width > 64) throw InvalidArgument("bitstream: width above 64");
  if (begin > bits_.size() || bits_.size() - begin < width) {
    throw InvalidArgument("bitstream: read past end");
  }
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | bits_[begin + i];
  return v;
}

std::uint64_t Bitstream::read(unsigned width) {
  const auto v = peek(cursor_, width);
  cursor_ += width;
  return v;
}

std::uint64_t framed_length(std::uint64_t payload_bits, unsigned header_bits) {
  if (header_bits != 16 && header_bits != 32) throw InvalidArgument("frame: header_bits must be 16 or 32");
  if (payload_bits >= (std::uint64_t{1} << header_bits)) {
    throw InvalidArgument("frame: payload of " + std::to_string(payload_bits) + " bits does not fit a " +
                          std::to_string(header_bits) + "-bit length header");
  }
  return payload_bits + header_bits;
}

Bitstream frame_message(std::span<const std::uint8_t> payload, unsigned header_bits) {
  const std::uint64_t payload_bits = std::uint64_t{payload.size()} * 8;
  framed_length(payload_bits, header_bits);
  Bitstream out;
  out.append(payload_bits, header_bits);
  for (std::uint8_t byte : payload) out.append(byte, 8);
  return out;
}

std::vector<std::uint8_t> unframe_message(const Bitstream& framed, unsigned header_bits) {
  if (header_bits != 16 && header_bits != 32) throw InvalidArgument("frame: header_bits must be 16 or 32");
  if (framed.size() < header_bits) throw InvalidArgument("frame: stream shorter than its header");
  const std::uint64_t payload_bits = framed.peek(0, header_bits);
  if (framed.size() - header_bits != payload_bits) {
    throw InvalidArgument("frame: header announces " + std::to_string(payload_bits) + " payload bits but " +
                          std::to_string(framed.size() - header_bits) + " follow");
  }
  if (payload_bits % 8 != 0) throw InvalidArgument("frame: payload is not a whole number of bytes");
  std::vector<std::uint8_t> bytes(payload_bits / 8);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(framed.peek(header_bits + 8 * i, 8));
  }
  return bytes;
}

}  // namespace adlm
