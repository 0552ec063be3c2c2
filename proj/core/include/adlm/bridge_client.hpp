// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adlm/provider.hpp"
#include "adlm/transport.hpp"

namespace adlm {

/// Wire messages of the model bridge: one JSON object per line.
namespace bridge {

enum class Op { describe, tokenize, detokenize, next_dist };

inline constexpr std::size_t kMaxTopN = 4096;

struct Request {
  Op op = Op::describe;
  std::vector<TokenId> ctx;  ///< next_dist and detokenize
  std::string text;          ///< tokenize
  std::size_t top_n = 0;     ///< next_dist
};

struct Response {
  bool ok = false;
  std::string model_id;
  std::uint64_t vocab_size = 0;
  std::vector<TokenId> tokens;
  std::vector<std::string> probs;  ///< decimal strings, parallel to tokens
  std::optional<std::string> text; ///< detokenize result
  std::string error;
};

std::string encode(const Request& req);
/// Parses one response line; unknown fields are ignored. Throws
/// TransportError on malformed JSON or mistyped fields, and on next_dist
/// payloads whose tokens/probs are not parallel, not in (0, 1], or not
/// descending.
Response parse_response(std::string_view line);
/// Parses a decimal probability string exactly as the primary side does.
double parse_probability(std::string_view text);

}  // namespace bridge

/// LanguageModel backed by a remote bridge process.
class BridgeClient final : public LanguageModel {
 public:
  /// Sends `describe` and records the reported identity.
  explicit BridgeClient(std::unique_ptr<LineTransport> transport, std::size_t top_n = kDefaultTopN);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  TokenDistribution next_distribution(std::span<const TokenId> ctx) const override;
  double token_probability(std::span<const TokenId> ctx, TokenId token) const override;
  TokenContext tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> ids) const override;
  bool ends_sentence(TokenId token) const override;

 private:
  bridge::Response call(const bridge::Request& req) const;

  mutable std::mutex mu_;
  std::unique_ptr<LineTransport> transport_;
  ProviderDescriptor descriptor_;
  mutable std::unordered_map<TokenId, bool> sentence_final_cache_;
};

}  // namespace adlm
