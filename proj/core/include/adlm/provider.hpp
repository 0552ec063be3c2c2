// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adlm/distribution.hpp"

namespace adlm {

/// Generation history, most recent token last.
using TokenContext = std::vector<TokenId>;

inline constexpr std::size_t kDefaultTopN = 512;

enum class ProviderKind { builtin_ngram, bridge };

std::string_view to_string(ProviderKind k) noexcept;

struct ProviderDescriptor {
  ProviderKind kind = ProviderKind::builtin_ngram;
  std::string model_id;         ///< content hash or bridge-reported id
  std::uint64_t vocab_size = 0; ///< number of predictable tokens, the |V| of the confidence measure
  std::size_t top_n = kDefaultTopN;
};

/// Source of next-token distributions and the matching tokenizer.
///
/// Implementations are read-only after construction and must be safe to call
/// from several threads at once.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const ProviderDescriptor& descriptor() const = 0;

  /// Top-N next-token distribution after `ctx`. Identical contexts yield
  /// identical distributions.
  virtual TokenDistribution next_distribution(std::span<const TokenId> ctx) const = 0;

  /// p(token | ctx) under the full, untruncated distribution.
  virtual double token_probability(std::span<const TokenId> ctx, TokenId token) const = 0;

  virtual TokenContext tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const TokenId> ids) const = 0;

  /// End-of-sequence token, if the model has one.
  virtual std::optional<TokenId> eos_token() const { return std::nullopt; }
  /// Out-of-vocabulary marker, if the tokenizer can produce one.
  virtual std::optional<TokenId> unk_token() const { return std::nullopt; }

  /// True if emitting `token` ends a sentence ('.', '!' or '?', or end of sequence).
  virtual bool ends_sentence(TokenId token) const;
};

}  // namespace adlm
