// SPDX-License-Identifier: Apache-2.0
#include "adlm/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "adlm/error.hpp"

namespace adlm::codec {

std::string_view to_string(StepKind k) noexcept {
  switch (k) {
    case StepKind::embed: return "embed";
    case StepKind::forced: return "forced";
    case StepKind::tail: return "tail";
  }
  return "unknown";
}

std::string to_json_line(const StepRecord& r, bool entropy_in_bits) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["kind"] = to_string(r.kind);
  j["token"] = r.token;
  j["pool_size"] = r.pool_size;
  j["bits"] = r.bits;
  j["value"] = r.value;
  j["bits_consumed"] = r.bits_consumed;
  j["conf"] = r.conf;
  if (entropy_in_bits) {
    j["entropy_bits"] = r.entropy / std::log(2.0);
  } else {
    j["entropy_nats"] = r.entropy;
  }
  j["stop_reason"] = entropy::to_string(r.stop_reason);
  return j.dump();
}

std::vector<Codeword> block_code(const entropy::CandidatePool& pool, unsigned k) {
  if (k >= 64 || (std::uint64_t{1} << k) > pool.size()) {
    throw InvalidArgument("block_code: 2^" + std::to_string(k) + " codewords exceed a pool of " +
                          std::to_string(pool.size()));
  }
  const std::size_t n = std::size_t{1} << k;
  std::vector<Codeword> code;
  code.reserve(n);
  for (std::size_t r = 0; r < n; ++r) code.push_back({pool.tokens[r], r, k});
  return code;
}

unsigned capacity_bits(std::size_t pool_size, const StegoKey& key) noexcept {
  if (pool_size < 2) return 0;
  unsigned k = static_cast<unsigned>(std::bit_width(pool_size) - 1);
  if (key.max_bits_per_step) k = std::min(k, *key.max_bits_per_step);
  return k;
}

entropy::CandidatePool build_pool(const TokenDistribution& dist, const StegoKey& key, PoolPolicy policy) {
  if (policy == PoolPolicy::adaptive) {
    return entropy::truncate(dist, key.epsilon, key.max_pool, key.delta_scale());
  }
  std::size_t width = key.max_pool;
  if (key.max_bits_per_step) width = std::min<std::size_t>(width, std::size_t{1} << *key.max_bits_per_step);
  const std::size_t n = std::min(width, dist.size());
  entropy::CandidatePool pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.tokens.push_back(dist[i].token);
    pool.probs.push_back(dist[i].prob);
  }
  pool.stop_reason = n < width ? entropy::StopReason::distribution_exhausted : entropy::StopReason::max_pool_cap;
  pool.conf = dist.vocab_size() >= 2 ? entropy::conf_k(dist, n) : 1.0;
  return pool;
}

void check_model(const StegoKey& key, const LanguageModel& lm) {
  const auto& id = lm.descriptor().model_id;
  if (key.model_id != id) {
    throw ModelMismatch("key is bound to model '" + key.model_id + "' but the provider is '" + id + "'");
  }
}

TokenContext prefix_context(const StegoKey& key, const LanguageModel& lm) {
  auto ctx = lm.tokenize(key.prefix);
  if (ctx.empty()) throw InvalidArgument("key: prefix tokenizes to no tokens");
  return ctx;
}

namespace {

// Bits the current step may carry: a step never crosses the header/payload
// boundary, and never runs past the end of the frame.
unsigned step_bits(unsigned capacity, std::size_t consumed, unsigned header_bits,
                   std::optional<std::size_t> total) {
  std::size_t left;
  if (consumed < header_bits) {
    left = header_bits - consumed;
  } else {
    left = *total - consumed;
  }
  return static_cast<unsigned>(std::min<std::size_t>(capacity, left));
}

StepRecord make_record(std::size_t step, StepKind kind, const entropy::CandidatePool& pool,
                       const TokenDistribution& dist, TokenId token) {
  StepRecord r;
  r.step = step;
  r.kind = kind;
  r.pool_size = pool.size();
  r.token = token;
  r.conf = pool.conf;
  r.entropy = entropy::entropy(dist);
  r.stop_reason = pool.stop_reason;
  return r;
}

using StepSink = std::function<void(const StepRecord&)>;

// Empty unless the caller asked for records.
StepSink make_sink(const Options& opts, std::vector<StepRecord>& trace) {
  if (!opts.trace && !opts.on_step) return {};
  return [&opts, &trace](const StepRecord& r) {
    if (opts.trace) trace.push_back(r);
    if (opts.on_step) opts.on_step(r);
  };
}

// Greedy continuation to the end of the sentence. Stops before <eos>.
std::vector<TokenId> complete_sentence(const LanguageModel& lm, TokenContext ctx, std::optional<TokenId> last,
                                       const StepSink& sink, std::size_t first_step,
                                       std::size_t bits_consumed) {
  std::vector<TokenId> tail;
  if (last && lm.ends_sentence(*last)) return tail;
  const auto eos = lm.eos_token();
  while (tail.size() < kMaxTailTokens) {
    const auto dist = lm.next_distribution(ctx);
    const TokenId t = dist[0].token;
    if (eos && t == *eos) break;
    if (sink) {
      StepRecord r;
      r.step = first_step + tail.size();
      r.kind = StepKind::tail;
      r.pool_size = 1;
      r.token = t;
      r.bits_consumed = bits_consumed;
      r.conf = entropy::conf_k(dist, 1);
      r.entropy = entropy::entropy(dist);
      r.stop_reason = entropy::StopReason::max_pool_cap;
      sink(r);
    }
    tail.push_back(t);
    ctx.push_back(t);
    if (lm.ends_sentence(t)) break;
  }
  return tail;
}

}  // namespace

StegoText embed(const StegoKey& key, const Bitstream& framed, const LanguageModel& lm, const Options& opts) {
  key.validate();
  check_model(key, lm);
  if (framed.size() < key.header_bits || framed.peek(0, key.header_bits) + key.header_bits != framed.size()) {
    throw InvalidArgument("embed: bitstream is not framed with a " + std::to_string(key.header_bits) +
                          "-bit length header");
  }

  TokenContext ctx = prefix_context(key, lm);
  Bitstream bits = framed;
  const std::size_t total = bits.size();
  const std::size_t stall_limit = 10 * total;
  std::size_t stall = 0;

  StegoText out;
  const auto sink = make_sink(opts, out.trace);
  while (!bits.exhausted()) {
    const auto dist = lm.next_distribution(ctx);
    const auto pool = build_pool(dist, key, opts.policy);
    const unsigned k = step_bits(capacity_bits(pool.size(), key), bits.cursor(), key.header_bits, total);

    TokenId token;
    std::uint64_t value = 0;
    if (k == 0) {
      token = pool.tokens[0];
      if (++stall >= stall_limit) {
        throw CapacityError("embed: candidate pool stayed at one token for " + std::to_string(stall) +
                            " consecutive steps; lower epsilon");
      }
    } else {
      stall = 0;
      value = bits.read(k);
      token = block_code(pool, k)[value].token;
    }
    if (sink) {
      auto r = make_record(out.token_ids.size(), k == 0 ? StepKind::forced : StepKind::embed, pool, dist, token);
      r.bits = k;
      r.value = value;
      r.bits_consumed = bits.cursor();
      sink(r);
    }
    out.token_ids.push_back(token);
    ctx.push_back(token);
  }
  out.embedded_bits = total;
  out.embedding_steps = out.token_ids.size();

  auto tail = complete_sentence(lm, ctx, out.token_ids.back(), sink, out.token_ids.size(), total);
  out.token_ids.insert(out.token_ids.end(), tail.begin(), tail.end());
  out.rendered = lm.detokenize(out.token_ids);
  return out;
}

StegoText embed_message(const StegoKey& key, std::span<const std::uint8_t> payload, const LanguageModel& lm,
                        const Options& opts) {
  key.validate();
  return embed(key, frame_message(payload, key.header_bits), lm, opts);
}

Extraction extract_tokens(const StegoKey& key, std::span<const TokenId> tokens, const LanguageModel& lm,
                          const Options& opts) {
  key.validate();
  check_model(key, lm);
  if (const auto unk = lm.unk_token()) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] == *unk) throw DesyncError(i, "stego text contains a word outside the model vocabulary");
    }
  }

  TokenContext ctx = prefix_context(key, lm);
  Bitstream bits;
  std::optional<std::size_t> total;
  Extraction out;
  const auto sink = make_sink(opts, out.trace);
  std::size_t i = 0;

  while (!total || bits.size() < *total) {
    if (i == tokens.size()) {
      throw DesyncError(i, "stego text ended after " + std::to_string(bits.size()) + " of " +
                               (total ? std::to_string(*total) : std::string("an unknown number of")) +
                               " framed bits");
    }
    const auto dist = lm.next_distribution(ctx);
    const auto pool = build_pool(dist, key, opts.policy);
    const unsigned k = step_bits(capacity_bits(pool.size(), key), bits.size(), key.header_bits, total);
    const TokenId observed = tokens[i];

    std::uint64_t value = 0;
    if (k == 0) {
      if (observed != pool.tokens[0]) {
        throw DesyncError(i, "single-candidate step expected token " + std::to_string(pool.tokens[0]) +
                                 ", found " + std::to_string(observed));
      }
    } else {
      const auto code = block_code(pool, k);
      auto it = std::find_if(code.begin(), code.end(), [&](const Codeword& c) { return c.token == observed; });
      if (it == code.end()) {
        throw DesyncError(i, "token " + std::to_string(observed) + " is not among the " +
                                 std::to_string(code.size()) + " coded candidates");
      }
      value = it->value;
      bits.append(value, k);
    }
    if (sink) {
      auto r = make_record(i, k == 0 ? StepKind::forced : StepKind::embed, pool, dist, observed);
      r.bits = k;
      r.value = value;
      r.bits_consumed = bits.size();
      sink(r);
    }
    if (!total && bits.size() == key.header_bits) {
      total = static_cast<std::size_t>(bits.peek(0, key.header_bits)) + key.header_bits;
    }
    ctx.push_back(observed);
    ++i;
  }

  const auto expected = complete_sentence(lm, ctx, tokens[i - 1], sink, i, bits.size());
  const auto observed_tail = tokens.subspan(i);
  const std::size_t common = std::min(expected.size(), observed_tail.size());
  for (std::size_t j = 0; j < common; ++j) {
    if (expected[j] != observed_tail[j]) {
      throw DesyncError(i + j, "sentence completion expected token " + std::to_string(expected[j]) + ", found " +
                                   std::to_string(observed_tail[j]));
    }
  }
  if (observed_tail.size() != expected.size()) {
    throw DesyncError(i + common, observed_tail.size() > expected.size()
                                      ? "unexpected tokens after the end of the message"
                                      : "stego text ends before the sentence completion");
  }

  try {
    out.payload = unframe_message(bits, key.header_bits);
  } catch (const InvalidArgument& e) {
    throw DesyncError(i, e.what());
  }
  return out;
}

std::vector<std::uint8_t> extract(const StegoKey& key, const StegoText& stego, const LanguageModel& lm) {
  return extract_tokens(key, stego.token_ids, lm).payload;
}

std::vector<std::uint8_t> extract_text(const StegoKey& key, std::string_view text, const LanguageModel& lm) {
  check_model(key, lm);
  const auto tokens = lm.tokenize(text);
  return extract_tokens(key, tokens, lm).payload;
}

}  // namespace adlm::codec
