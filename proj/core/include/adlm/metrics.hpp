// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adlm/codec.hpp"
#include "adlm/entropy.hpp"
#include "adlm/key.hpp"
#include "adlm/provider.hpp"

namespace adlm::metrics {

inline constexpr int kReportFormatVersion = 1;

/// exp of the mean negative log-likelihood of `tokens` under the provider's
/// full distribution, each token conditioned on `context` plus the tokens
/// before it. Throws InvalidArgument on empty input or a zero-probability token.
double perplexity(const LanguageModel& lm, std::span<const TokenId> tokens, std::span<const TokenId> context = {});

/// Unique n-grams / total n-grams. Throws InvalidArgument if n == 0 or the
/// sequence is shorter than n.
double distinct_n(std::span<const TokenId> tokens, std::size_t n);

/// Empirical unigram entropy of a token sequence, in nats.
double unigram_entropy(std::span<const TokenId> tokens);

struct EntropyGap {
  double stego_entropy = 0.0;
  double reference_entropy = 0.0;
  double gap = 0.0;  ///< |stego - reference|

  bool within(double tolerance) const noexcept { return gap <= tolerance; }
};

/// Unigram entropy difference between stego output and a reference corpus.
EntropyGap entropy_gap(std::span<const TokenId> stego_tokens, std::span<const TokenId> reference_tokens);

struct SweepRow {
  double epsilon = 0.0;
  double mean_pool_size = 0.0;
  double stddev = 0.0;     ///< over all steps of all samples
  std::size_t samples = 0;
  std::size_t steps = 0;   ///< pool sizes averaged
};

struct SweepReport {
  int format_version = kReportFormatVersion;
  std::vector<SweepRow> rows;
};

struct SweepConfig {
  std::size_t samples_per_point = 200;
  std::size_t steps_per_sample = 40;
  std::size_t max_pool = kDefaultMaxPool;
  entropy::DeltaScale scale = entropy::DeltaScale::single;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Generates `samples_per_point` texts (prefixes used round-robin; each step
/// picks a candidate by seeded random bits from the pool at the smallest
/// epsilon, as embedding would) and, at every step, truncates the same
/// distribution at each epsilon. A row averages its epsilon's pool size over
/// all steps, so rows are non-increasing. Epsilons must be strictly increasing.
SweepReport threshold_sweep(const LanguageModel& lm, std::span<const std::string> prefixes,
                            std::span<const double> epsilons, const SweepConfig& cfg = {});

enum class Variant { adaptive, ablation };

std::string_view to_string(Variant v) noexcept;

struct EvalRow {
  Variant variant = Variant::adaptive;
  unsigned bpw = 1;               ///< max_bits_per_step cap
  double ppl = 0.0;               ///< mean over samples
  double distinct = 0.0;          ///< distinct-2 over all samples
  double distinct1 = 0.0;
  double measured_bpw = 0.0;      ///< framed bits / embedding tokens
  unsigned max_step_bits = 0;     ///< largest bits carried by one token
  std::size_t sample_count = 0;
  std::size_t failures = 0;       ///< capacity errors, excluded
};

struct EvalReport {
  int format_version = kReportFormatVersion;
  std::vector<EvalRow> rows;  ///< adaptive rows then ablation rows, bpw ascending
};

struct EvalConfig {
  bool ablation = true;
};

/// For each cap in `bpw_list` (each in [1, 8]) embeds every payload with the
/// key's max_bits_per_step set to the cap and scores the outputs. With
/// cfg.ablation the same payloads are also embedded with the fixed top-2^cap
/// pool.
EvalReport eval_table(const LanguageModel& lm, const StegoKey& key_template,
                      std::span<const std::vector<std::uint8_t>> payloads, std::span<const unsigned> bpw_list,
                      const EvalConfig& cfg = {});

struct LabeledText {
  std::string label;  ///< "cover" or "stego"
  std::string text;
};

/// Cover text by ancestral sampling from the provider's top-N distribution
/// until the sentence ends after at least `min_tokens` tokens, capped at
/// `max_tokens`.
std::vector<TokenId> sample_cover(const LanguageModel& lm, std::span<const TokenId> context, std::size_t min_tokens,
                                  std::size_t max_tokens, std::uint64_t seed);

/// Paired cover/stego corpus for external steganalysis: one stego text per
/// payload and one cover text of matching length. Capacity failures are skipped.
std::vector<LabeledText> export_corpus(const LanguageModel& lm, const StegoKey& key,
                                       std::span<const std::vector<std::uint8_t>> payloads, std::uint64_t seed);

/// Deterministic pseudo-random payloads.
std::vector<std::vector<std::uint8_t>> random_payloads(std::size_t count, std::size_t min_bytes,
                                                       std::size_t max_bytes, std::uint64_t seed);

/// Counter-based seed derivation shared by the harness.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) noexcept;

}  // namespace adlm::metrics
