// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adlm/bitstream.hpp"
#include "adlm/entropy.hpp"
#include "adlm/key.hpp"
#include "adlm/provider.hpp"

/// Hides a framed bitstream in generated text and recovers it.
///
/// At every step the provider's distribution is truncated into a candidate
/// pool of size m. A pool of one forces its token and carries no bits.
/// Otherwise k = floor(log2 m) (capped by the key) bits select one of the
/// first 2^k candidates by rank. A step never spans the boundary between the
/// length header and the payload, so the receiver always knows k. After the
/// last bit the text is completed greedily to the end of the sentence.
namespace adlm::codec {

/// Longest greedy completion appended after the last embedded bit.
inline constexpr std::size_t kMaxTailTokens = 64;

enum class PoolPolicy {
  adaptive,  ///< confidence-driven truncation
  fixed,     ///< top 2^max_bits_per_step, no truncation (ablation)
};

enum class StepKind { embed, forced, tail };

std::string_view to_string(StepKind k) noexcept;

struct StepRecord {
  std::size_t step = 0;
  StepKind kind = StepKind::embed;
  std::size_t pool_size = 0;
  unsigned bits = 0;              ///< bits carried by this token
  std::uint64_t value = 0;        ///< their value, big-endian
  std::size_t bits_consumed = 0;  ///< cumulative, including this step
  TokenId token = 0;
  double conf = 0.0;              ///< Conf_k of the retained pool
  double entropy = 0.0;           ///< nats, of the step's distribution
  entropy::StopReason stop_reason = entropy::StopReason::threshold;
};

/// JSON-lines form of one record; entropy in nats unless `bits` is set.
std::string to_json_line(const StepRecord& r, bool entropy_in_bits = false);

struct StegoText {
  std::vector<TokenId> token_ids;  ///< generated tokens, prefix excluded
  std::string rendered;            ///< detokenize(token_ids)
  std::vector<StepRecord> trace;   ///< one record per token when tracing
  std::size_t embedded_bits = 0;
  std::size_t embedding_steps = 0; ///< tokens emitted before the tail
};

struct Options {
  bool trace = false;  ///< collect records in the result
  /// Called with each record as it is produced, so a failing extraction
  /// still reports every step before the error.
  std::function<void(const StepRecord&)> on_step;
  PoolPolicy policy = PoolPolicy::adaptive;
};

struct Codeword {
  TokenId token = 0;
  std::uint64_t value = 0;
  unsigned width = 0;
};

/// Rank r gets the k-bit codeword r. Throws InvalidArgument if 2^k exceeds
/// the pool size.
std::vector<Codeword> block_code(const entropy::CandidatePool& pool, unsigned k);

/// Bits a pool of `pool_size` can carry under `key`, before the remaining-length cap.
unsigned capacity_bits(std::size_t pool_size, const StegoKey& key) noexcept;

/// The pool both ends build from one step's distribution. The fixed policy
/// keeps the top 2^max_bits_per_step entries (max_pool when unlimited).
entropy::CandidatePool build_pool(const TokenDistribution& dist, const StegoKey& key,
                                  PoolPolicy policy = PoolPolicy::adaptive);

/// Throws ModelMismatch when the provider is not the model named by the key.
void check_model(const StegoKey& key, const LanguageModel& lm);

/// Key prefix as tokens; throws InvalidArgument if it tokenizes to nothing.
TokenContext prefix_context(const StegoKey& key, const LanguageModel& lm);

/// Embeds a framed bitstream (as produced by frame_message with the key's
/// header width). Throws ModelMismatch, CapacityError after
/// 10 x framed-length consecutive single-candidate steps, InvalidArgument on a
/// bad key or an unframed stream.
StegoText embed(const StegoKey& key, const Bitstream& framed, const LanguageModel& lm, const Options& opts = {});

/// frame_message() + embed().
StegoText embed_message(const StegoKey& key, std::span<const std::uint8_t> payload, const LanguageModel& lm,
                        const Options& opts = {});

struct Extraction {
  std::vector<std::uint8_t> payload;
  std::vector<StepRecord> trace;
};

/// Replays generation along `tokens` and returns the payload. Throws
/// DesyncError naming the step when a token could not have been produced
/// (outside the coding set, wrong forced token, wrong completion, missing or
/// extra tokens, out-of-vocabulary word).
Extraction extract_tokens(const StegoKey& key, std::span<const TokenId> tokens, const LanguageModel& lm,
                          const Options& opts = {});
std::vector<std::uint8_t> extract(const StegoKey& key, const StegoText& stego, const LanguageModel& lm);
/// Tokenizes `text` with the provider first.
std::vector<std::uint8_t> extract_text(const StegoKey& key, std::string_view text, const LanguageModel& lm);

}  // namespace adlm::codec
