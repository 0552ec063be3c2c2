// SPDX-License-Identifier: Apache-2.0
#include "adlm/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "adlm/error.hpp"

namespace adlm::metrics {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
  // splitmix64 finalizer over (seed, counter)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double perplexity(const LanguageModel& lm, std::span<const TokenId> tokens, std::span<const TokenId> context) {
  if (tokens.empty()) throw InvalidArgument("perplexity: empty token sequence");
  TokenContext ctx(context.begin(), context.end());
  ctx.reserve(context.size() + tokens.size());
  double nll = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double p = lm.token_probability(ctx, tokens[i]);
    if (!(p > 0.0)) {
      throw InvalidArgument("perplexity: token " + std::to_string(tokens[i]) + " at position " + std::to_string(i) +
                            " has zero probability");
    }
    nll -= std::log(p);
    ctx.push_back(tokens[i]);
  }
  return std::exp(nll / static_cast<double>(tokens.size()));
}

namespace {

// Unique and total n-gram counts over several sequences, n-grams never
// crossing a sequence boundary.
std::pair<std::size_t, std::size_t> ngram_counts(std::span<const std::vector<TokenId>> seqs, std::size_t n) {
  std::set<std::vector<TokenId>> unique;
  std::size_t total = 0;
  for (const auto& s : seqs) {
    if (s.size() < n) continue;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      unique.emplace(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++total;
    }
  }
  return {unique.size(), total};
}

double distinct_over(std::span<const std::vector<TokenId>> seqs, std::size_t n) {
  const auto [unique, total] = ngram_counts(seqs, n);
  return total == 0 ? 0.0 : static_cast<double>(unique) / static_cast<double>(total);
}

}  // namespace

double distinct_n(std::span<const TokenId> tokens, std::size_t n) {
  if (n == 0) throw InvalidArgument("distinct_n: n must be positive");
  if (tokens.size() < n) {
    throw InvalidArgument("distinct_n: sequence of " + std::to_string(tokens.size()) + " tokens is shorter than n = " +
                          std::to_string(n));
  }
  const std::vector<TokenId> seq(tokens.begin(), tokens.end());
  return distinct_over(std::span(&seq, 1), n);
}

double unigram_entropy(std::span<const TokenId> tokens) {
  if (tokens.empty()) throw InvalidArgument("entropy_gap: empty token sequence");
  std::map<TokenId, std::size_t> hist;
  for (TokenId t : tokens) ++hist[t];
  const double n = static_cast<double>(tokens.size());
  double h = 0.0;
  for (const auto& [t, c] : hist) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

EntropyGap entropy_gap(std::span<const TokenId> stego_tokens, std::span<const TokenId> reference_tokens) {
  EntropyGap g;
  g.stego_entropy = unigram_entropy(stego_tokens);
  g.reference_entropy = unigram_entropy(reference_tokens);
  g.gap = std::abs(g.stego_entropy - g.reference_entropy);
  return g;
}

namespace {

struct SampleStats {
  std::vector<double> sum, sum_sq;  ///< per epsilon
  std::size_t steps = 0;
};

// One text per sample, chosen by random bits from the pool at the smallest
// epsilon; every epsilon's pool is measured on the same distributions, so the
// per-step sizes are non-increasing in epsilon.
SampleStats run_sample(const LanguageModel& lm, const TokenContext& prefix, std::span<const double> epsilons,
                       const SweepConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TokenContext ctx = prefix;
  SampleStats s;
  s.sum.assign(epsilons.size(), 0.0);
  s.sum_sq.assign(epsilons.size(), 0.0);
  for (std::size_t step = 0; step < cfg.steps_per_sample; ++step) {
    const auto dist = lm.next_distribution(ctx);
    entropy::CandidatePool walk;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      auto pool = entropy::truncate(dist, epsilons[e], cfg.max_pool, cfg.scale);
      const double m = static_cast<double>(pool.size());
      s.sum[e] += m;
      s.sum_sq[e] += m * m;
      if (e == 0) walk = std::move(pool);
    }
    ++s.steps;
    std::size_t index = 0;
    if (walk.size() >= 2) {
      const unsigned k = static_cast<unsigned>(std::bit_width(walk.size()) - 1);
      index = static_cast<std::size_t>(rng() >> (64 - k));
    }
    ctx.push_back(walk.tokens[index]);
  }
  return s;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

SweepReport threshold_sweep(const LanguageModel& lm, std::span<const std::string> prefixes,
                            std::span<const double> epsilons, const SweepConfig& cfg) {
  if (prefixes.empty()) throw InvalidArgument("sweep: at least one prefix is required");
  if (cfg.samples_per_point == 0 || cfg.steps_per_sample == 0) {
    throw InvalidArgument("sweep: samples and steps must be positive");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!std::isfinite(epsilons[i]) || epsilons[i] < 0.0) throw InvalidArgument("sweep: epsilons must be >= 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) throw InvalidArgument("sweep: epsilons must be strictly increasing");
  }
  std::vector<TokenContext> contexts;
  for (const auto& p : prefixes) {
    contexts.push_back(lm.tokenize(p));
    if (contexts.back().empty()) throw InvalidArgument("sweep: prefix '" + p + "' tokenizes to nothing");
  }

  SweepReport report;
  if (epsilons.empty()) return report;
  std::vector<SampleStats> stats(cfg.samples_per_point);
  parallel_for(cfg.samples_per_point, cfg.threads, [&](std::size_t i) {
    stats[i] = run_sample(lm, contexts[i % contexts.size()], epsilons, cfg, derive_seed(cfg.seed, i));
  });
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t steps = 0;
    for (const auto& s : stats) {
      sum += s.sum[e];
      sum_sq += s.sum_sq[e];
      steps += s.steps;
    }
    SweepRow row;
    row.epsilon = epsilons[e];
    row.samples = cfg.samples_per_point;
    row.steps = steps;
    const double n = static_cast<double>(steps);
    row.mean_pool_size = sum / n;
    row.stddev = std::sqrt(std::max(0.0, sum_sq / n - row.mean_pool_size * row.mean_pool_size));
    report.rows.push_back(row);
  }
  return report;
}

std::string_view to_string(Variant v) noexcept { return v == Variant::adaptive ? "adaptive" : "ablation"; }

namespace {

EvalRow eval_row(const LanguageModel& lm, const StegoKey& key, std::span<const std::vector<std::uint8_t>> payloads,
                 Variant variant) {
  EvalRow row;
  row.variant = variant;
  row.bpw = *key.max_bits_per_step;
  codec::Options opts;
  opts.trace = true;
  opts.policy = variant == Variant::adaptive ? codec::PoolPolicy::adaptive : codec::PoolPolicy::fixed;

  const TokenContext prefix = codec::prefix_context(key, lm);
  std::vector<std::vector<TokenId>> texts;
  double ppl_sum = 0.0;
  std::size_t bits = 0;
  std::size_t embed_tokens = 0;
  for (const auto& payload : payloads) {
    codec::StegoText st;
    try {
      st = codec::embed_message(key, payload, lm, opts);
    } catch (const CapacityError&) {
      ++row.failures;
      continue;
    }
    ppl_sum += perplexity(lm, st.token_ids, prefix);
    bits += st.embedded_bits;
    embed_tokens += st.embedding_steps;
    for (const auto& r : st.trace) row.max_step_bits = std::max(row.max_step_bits, r.bits);
    texts.push_back(std::move(st.token_ids));
  }
  row.sample_count = texts.size();
  if (!texts.empty()) {
    row.ppl = ppl_sum / static_cast<double>(texts.size());
    row.distinct = distinct_over(texts, 2);
    row.distinct1 = distinct_over(texts, 1);
    row.measured_bpw = static_cast<double>(bits) / static_cast<double>(embed_tokens);
  }
  return row;
}

}  // namespace

EvalReport eval_table(const LanguageModel& lm, const StegoKey& key_template,
                      std::span<const std::vector<std::uint8_t>> payloads, std::span<const unsigned> bpw_list,
                      const EvalConfig& cfg) {
  if (bpw_list.empty()) throw InvalidArgument("eval: bpw list is empty");
  for (unsigned b : bpw_list) {
    if (b < 1 || b > 8) throw InvalidArgument("eval: bpw values must lie in [1, 8]");
  }
  if (payloads.empty()) throw InvalidArgument("eval: no payloads");
  std::vector<unsigned> caps(bpw_list.begin(), bpw_list.end());
  std::sort(caps.begin(), caps.end());
  caps.erase(std::unique(caps.begin(), caps.end()), caps.end());

  EvalReport report;
  for (Variant v : {Variant::adaptive, Variant::ablation}) {
    if (v == Variant::ablation && !cfg.ablation) break;
    for (unsigned cap : caps) {
      StegoKey key = key_template;
      key.max_bits_per_step = cap;
      report.rows.push_back(eval_row(lm, key, payloads, v));
    }
  }
  return report;
}

std::vector<TokenId> sample_cover(const LanguageModel& lm, std::span<const TokenId> context, std::size_t min_tokens,
                                  std::size_t max_tokens, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TokenContext ctx(context.begin(), context.end());
  std::vector<TokenId> out;
  const auto eos = lm.eos_token();
  while (out.size() < max_tokens) {
    const auto dist = lm.next_distribution(ctx);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * dequantize(dist.listed_quanta());
    double acc = 0.0;
    TokenId t = dist[dist.size() - 1].token;
    for (const auto& e : dist.entries()) {
      acc += e.prob;
      if (u < acc) {
        t = e.token;
        break;
      }
    }
    if (eos && t == *eos && out.size() >= min_tokens) break;
    out.push_back(t);
    ctx.push_back(t);
    if (out.size() >= min_tokens && lm.ends_sentence(t)) break;
  }
  return out;
}

std::vector<LabeledText> export_corpus(const LanguageModel& lm, const StegoKey& key,
                                       std::span<const std::vector<std::uint8_t>> payloads, std::uint64_t seed) {
  const TokenContext prefix = codec::prefix_context(key, lm);
  std::vector<LabeledText> out;
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    codec::StegoText st;
    try {
      st = codec::embed_message(key, payloads[i], lm);
    } catch (const CapacityError&) {
      continue;
    }
    const auto cover = sample_cover(lm, prefix, st.token_ids.size(), 2 * st.token_ids.size() + 16,
                                    derive_seed(seed, i));
    out.push_back({"cover", lm.detokenize(cover)});
    out.push_back({"stego", std::move(st.rendered)});
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> random_payloads(std::size_t count, std::size_t min_bytes,
                                                       std::size_t max_bytes, std::uint64_t seed) {
  if (min_bytes > max_bytes) throw InvalidArgument("payloads: min_bytes > max_bytes");
  std::vector<std::vector<std::uint8_t>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    const std::size_t len = min_bytes + static_cast<std::size_t>(rng() % (max_bytes - min_bytes + 1));
    out[i].resize(len);
    for (auto& b : out[i]) b = static_cast<std::uint8_t>(rng() >> 56);
  }
  return out;
}

}  // namespace adlm::metrics
