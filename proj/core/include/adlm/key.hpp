// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "adlm/bitstream.hpp"
#include "adlm/entropy.hpp"

namespace adlm {

inline constexpr std::size_t kDefaultMaxPool = 512;
inline constexpr double kDefaultEpsilon = 0.001;

/// Shared secret settings that both ends must hold.
struct StegoKey {
  std::string prefix;
  double epsilon = kDefaultEpsilon;
  std::string model_id;
  std::size_t max_pool = kDefaultMaxPool;
  std::optional<unsigned> max_bits_per_step;  ///< nullopt = unlimited
  unsigned header_bits = kDefaultHeaderBits;
  bool delta_double_norm = false;

  entropy::DeltaScale delta_scale() const noexcept {
    return delta_double_norm ? entropy::DeltaScale::double_norm : entropy::DeltaScale::single;
  }

  /// Throws InvalidArgument on an empty prefix, a negative or non-finite
  /// epsilon, max_pool == 0, max_bits_per_step outside [1, 16], or
  /// header_bits not in {16, 32}.
  void validate() const;

  friend bool operator==(const StegoKey&, const StegoKey&) = default;
};

/// JSON key document with exactly the fields prefix, epsilon, model_id,
/// max_pool, max_bits_per_step (integer or null), header_bits,
/// delta_double_norm. Missing optional fields take defaults; unknown fields are
/// rejected.
StegoKey parse_key(std::string_view json_text);
std::string key_to_json(const StegoKey& key);

StegoKey load_key(const std::filesystem::path& path);
void save_key(const StegoKey& key, const std::filesystem::path& path);

}  // namespace adlm
