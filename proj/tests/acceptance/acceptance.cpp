// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adlm/codec.hpp"
#include "adlm/entropy.hpp"
#include "adlm/error.hpp"
#include "adlm/metrics.hpp"
#include "adlm/ngram.hpp"
#include "adlm/report.hpp"
#include "support/corpus.hpp"
#include "support/oracle.hpp"

using namespace adlm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(const char* name, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const NgramModel> train(std::size_t sentences, std::uint64_t seed, double richness = 1.0,
                                        int order = NgramModel::kDefaultOrder,
                                        double k = NgramModel::kDefaultSmoothing) {
  std::istringstream in(testing::synthetic_corpus(sentences, seed, richness));
  return NgramModel::train(in, order, k);
}

const std::vector<std::string> kPrefixes = {"the old man", "she", "anna", "that morning ,", "did the"};

// The reference model for the sweep, eval and desync criteria.
const NgramModel& reference_model() {
  static const auto m = train(20000, 2024);
  return *m;
}

Outcome round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Spec {
    std::size_t sentences;
    std::uint64_t seed;
    double richness;
    int order;
    double k;
  };
  const std::vector<Spec> specs = {{1500, 1, 0.6, 2, 0.01}, {3000, 2, 1.0, 3, 0.01}, {6000, 3, 0.8, 3, 0.05},
                                   {3000, 4, 1.0, 4, 0.01}, {800, 5, 0.4, 1, 0.1},   {5000, 6, 1.0, 3, 0.002}};
  std::vector<std::shared_ptr<const NgramModel>> models;
  for (const auto& s : specs) models.push_back(train(s.sentences, s.seed, s.richness, s.order, s.k));

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> eps_dist(0.0, 0.01);
  std::size_t ok = 0, capacity = 0, wrong = 0, errors = 0;
  std::string first_problem;
  for (int i = 0; i < 1000; ++i) {
    const auto& lm = *models[rng() % models.size()];
    StegoKey key;
    key.prefix = kPrefixes[rng() % kPrefixes.size()];
    key.epsilon = eps_dist(rng);
    key.model_id = lm.descriptor().model_id;
    key.header_bits = rng() % 4 == 0 ? 16 : 32;
    if (rng() % 3 == 0) key.max_bits_per_step = 1 + static_cast<unsigned>(rng() % 8);
    std::vector<std::uint8_t> payload(1 + rng() % 256);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng() >> 56);

    codec::StegoText st;
    try {
      st = codec::embed_message(key, payload, lm);
    } catch (const CapacityError&) {
      ++capacity;
      continue;
    }
    try {
      if (codec::extract_text(key, st.rendered, lm) == payload) {
        ++ok;
      } else {
        ++wrong;
        if (first_problem.empty()) first_problem = fmt("triple %d: wrong payload", i);
      }
    } catch (const std::exception& e) {
      ++errors;
      if (first_problem.empty()) first_problem = fmt("triple %d: %s", i, e.what());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = wrong == 0 && errors == 0 && ok > 0 && secs < 300.0;
  auto detail = fmt("%zu/%zu non-capacity triples recovered, %zu capacity errors, %.1fs of 300s", ok,
                    ok + wrong + errors, capacity, secs);
  if (!first_problem.empty()) detail += "; first failure " + first_problem;
  return {pass, detail};
}

Outcome delta_nonnegative() {
  std::mt19937_64 rng(1);
  std::size_t checked = 0, violations = 0, deltas_seen = 0;
  double worst = 0.0;
  std::vector<double> deltas;
  for (; checked < 100000; ++checked) {
    const auto d = testing::random_distribution(rng, 1024);
    entropy::truncate_traced(d, 0.0, d.size(), entropy::DeltaScale::single, deltas);
    deltas_seen += deltas.size();
    for (double x : deltas) {
      worst = std::min(worst, x);
      if (x < -1e-9) ++violations;
    }
  }
  return {violations == 0, fmt("%zu distributions, %zu deltas, %zu below -1e-9, min %.3g", checked, deltas_seen,
                               violations, worst)};
}

Outcome telescoping() {
  std::mt19937_64 rng(2);
  std::size_t dists = 0, bad_sum = 0, bad_full = 0, full_checked = 0;
  double worst = 0.0;
  for (; dists < 20000; ++dists) {
    const auto d = testing::random_distribution(rng, 1024);
    const auto oracle = testing::oracle_conf_all(testing::probs_of(d), d.vocab_size());
    entropy::ConfidenceState st;
    double sum = 0.0;
    for (std::size_t k = 1; k <= d.size(); ++k) {
      const auto step = entropy::delta_conf(st, d[k - 1], d);
      sum += step.delta;
      st = step.next;
      double err = std::abs(sum - static_cast<double>(oracle[k]));
      // conf_k is O(k); compare it on a sample of prefixes.
      if (k % 61 == 1 || k == d.size()) err = std::max(err, std::abs(sum - entropy::conf_k(d, k)));
      worst = std::max(worst, err);
      if (err > 1e-9) ++bad_sum;
    }
    if (d.size() == d.vocab_size()) {
      ++full_checked;
      if (std::abs(entropy::conf_k(d, d.size()) - entropy::confidence(d)) > 1e-9) ++bad_full;
    }
  }
  return {bad_sum == 0 && bad_full == 0 && full_checked > 0,
          fmt("%zu distributions: %zu prefix sums off by >1e-9 (max %.2g); Conf_full != Conf on %zu of %zu", dists,
              bad_sum, worst, bad_full, full_checked)};
}

Outcome boundaries() {
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::uint64_t v : {2ull, 4ull, 16ull, 1024ull}) {
    std::vector<std::pair<TokenId, double>> u;
    for (std::uint64_t i = 0; i < v; ++i) u.emplace_back(static_cast<TokenId>(i), 1.0 / static_cast<double>(v));
    const double cu = entropy::confidence(TokenDistribution::make(v, u));
    const std::vector<std::pair<TokenId, double>> deg{{0, 1.0}};
    const double cd = entropy::confidence(TokenDistribution::make(v, deg));
    worst = std::max({worst, std::abs(cu), std::abs(cd - 1.0)});
    if (std::abs(cu) > 1e-12 || std::abs(cd - 1.0) > 1e-12) ++bad;
  }
  return {bad == 0, fmt("|V| in {2,4,16,1024}: max deviation %.2g", worst)};
}

Outcome incremental_vs_oracle() {
  std::mt19937_64 rng(3);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto d = testing::random_distribution(rng, 1024);
    const std::size_t k = 1 + rng() % d.size();
    entropy::ConfidenceState st;
    double delta = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const auto step = entropy::delta_conf(st, d[j - 1], d);
      delta = step.delta;
      st = step.next;
    }
    const auto p = testing::probs_of(d);
    const long double ref = testing::oracle_conf_k(p, d.vocab_size(), k) - testing::oracle_conf_k(p, d.vocab_size(), k - 1);
    const double err = std::abs(delta - static_cast<double>(ref));
    worst = std::max(worst, err);
    if (err > 1e-9) ++bad;
  }
  return {bad == 0, fmt("10000 (dist, k) pairs: %zu beyond 1e-9, max error %.2g", bad, worst)};
}

Outcome sweep_shape() {
  const auto& lm = reference_model();
  const std::vector<double> eps{0.0005, 0.001, 0.002, 0.004, 0.008};
  metrics::SweepConfig cfg;
  cfg.samples_per_point = 200;
  cfg.seed = 42;
  const auto r = metrics::threshold_sweep(lm, kPrefixes, eps, cfg);
  bool monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i) monotone &= r.rows[i].mean_pool_size <= r.rows[i - 1].mean_pool_size;
  const double small = std::min(r.rows[0].mean_pool_size, r.rows[1].mean_pool_size);
  const double ratio = r.rows.back().mean_pool_size / small;
  std::string pools;
  for (const auto& row : r.rows) pools += fmt("%s%.2f", pools.empty() ? "" : ", ", row.mean_pool_size);
  return {monotone && ratio < 0.5,
          fmt("mean pool [%s]; non-increasing=%s; largest/smallest-two = %.3f (need < 0.5)", pools.c_str(),
              monotone ? "yes" : "no", ratio)};
}

metrics::EvalReport eval_report() {
  static const auto r = [] {
    const auto& lm = reference_model();
    StegoKey key;
    key.prefix = "the old man";
    key.model_id = lm.descriptor().model_id;
    const auto payloads = metrics::random_payloads(30, 4, 48, 11);
    const std::vector<unsigned> caps{1, 2, 3, 4};
    return metrics::eval_table(lm, key, payloads, caps);
  }();
  return r;
}

Outcome bpw_cap() {
  const auto& lm = reference_model();
  std::size_t runs = 0, over = 0;
  for (unsigned c = 1; c <= 4; ++c) {
    for (const auto& policy : {codec::PoolPolicy::adaptive, codec::PoolPolicy::fixed}) {
      StegoKey key;
      key.prefix = kPrefixes[c % kPrefixes.size()];
      key.model_id = lm.descriptor().model_id;
      key.max_bits_per_step = c;
      codec::Options opts;
      opts.trace = true;
      opts.policy = policy;
      for (const auto& payload : metrics::random_payloads(25, 1, 64, 100 + c)) {
        codec::StegoText st;
        try {
          st = codec::embed_message(key, payload, lm, opts);
        } catch (const CapacityError&) {
          continue;
        }
        ++runs;
        unsigned max_step = 0;
        for (const auto& rec : st.trace) max_step = std::max(max_step, rec.bits);
        const double bpw = static_cast<double>(st.embedded_bits) / static_cast<double>(st.embedding_steps);
        const double bpw_all = static_cast<double>(st.embedded_bits) / static_cast<double>(st.token_ids.size());
        if (bpw > c || bpw_all > c || max_step > c) ++over;
      }
    }
  }
  const auto report = eval_report();
  const std::string csv = report::to_csv(report);
  const std::string expected_head = "variant,metric,bpw=1,bpw=2,bpw=3,bpw=4\n";
  bool schema = csv.rfind(expected_head, 0) == 0;
  std::istringstream lines(csv.substr(expected_head.size()));
  std::string line;
  std::size_t n = 0;
  for (const char* row : {"adaptive,PPL,", "adaptive,Distinct,", "ablation,PPL,", "ablation,Distinct,"}) {
    schema &= static_cast<bool>(std::getline(lines, line)) && line.rfind(row, 0) == 0 &&
              std::count(line.begin(), line.end(), ',') == 5;
    ++n;
  }
  schema &= !std::getline(lines, line);
  for (const auto& row : report.rows) {
    if (row.measured_bpw > row.bpw || row.max_step_bits > row.bpw) ++over;
  }
  return {over == 0 && runs > 0 && schema,
          fmt("%zu capped runs, %zu exceed their cap; eval table schema %s", runs, over, schema ? "exact" : "MISMATCH")};
}

Outcome ablation() {
  const auto report = eval_report();
  std::string detail;
  bool complete = report.rows.size() == 8;
  for (std::size_t i = 0; complete && i < 4; ++i) {
    const auto& a = report.rows[i];
    const auto& b = report.rows[i + 4];
    complete &= a.variant == metrics::Variant::adaptive && b.variant == metrics::Variant::ablation &&
                a.bpw == b.bpw && a.sample_count > 0 && b.sample_count > 0;
    detail += fmt("%sbpw=%u PPL %.2f vs %.2f, Distinct %.3f vs %.3f", detail.empty() ? "" : "; ", a.bpw, a.ppl,
                  b.ppl, a.distinct, b.distinct);
  }
  return {complete, "adaptive vs fixed pool: " + detail};
}

Outcome desync() {
  const auto& lm = reference_model();
  std::mt19937_64 rng(9);
  std::size_t mutations = 0, detected = 0, silent = 0, other = 0;
  const std::size_t vocab_end = lm.token_count();
  while (mutations < 500) {
    StegoKey key;
    key.prefix = kPrefixes[rng() % kPrefixes.size()];
    key.epsilon = 0.0005 + 0.004 * static_cast<double>(rng() % 1000) / 1000.0;
    key.model_id = lm.descriptor().model_id;
    std::vector<std::uint8_t> payload(1 + rng() % 24);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng() >> 56);
    codec::Options opts;
    opts.trace = true;
    codec::StegoText st;
    try {
      st = codec::embed_message(key, payload, lm, opts);
    } catch (const CapacityError&) {
      continue;
    }
    const std::size_t pos = rng() % st.token_ids.size();
    // The coding set at `pos`: the first 2^bits pool entries, or the forced token.
    auto ctx = codec::prefix_context(key, lm);
    ctx.insert(ctx.end(), st.token_ids.begin(), st.token_ids.begin() + static_cast<std::ptrdiff_t>(pos));
    const auto& rec = st.trace[pos];
    std::vector<TokenId> coding;
    if (rec.kind == codec::StepKind::embed) {
      const auto pool = codec::build_pool(lm.next_distribution(ctx), key);
      coding.assign(pool.tokens.begin(), pool.tokens.begin() + (std::ptrdiff_t{1} << rec.bits));
    } else {
      coding.push_back(st.token_ids[pos]);
    }
    TokenId replacement;
    do {
      replacement = static_cast<TokenId>(NgramModel::kEos + rng() % (vocab_end - NgramModel::kEos));
    } while (replacement == NgramModel::kUnk ||
             std::find(coding.begin(), coding.end(), replacement) != coding.end());
    auto tokens = st.token_ids;
    tokens[pos] = replacement;
    ++mutations;
    try {
      const auto got = codec::extract_tokens(key, tokens, lm).payload;
      ++silent;
      (void)got;
    } catch (const DesyncError&) {
      ++detected;
    } catch (const std::exception&) {
      ++other;
    }
  }
  return {detected == mutations,
          fmt("%zu mutations: %zu desync errors, %zu silent payloads, %zu other errors", mutations, detected, silent,
              other)};
}

}  // namespace

int main() {
  run("round-trip", round_trip);
  run("delta-nonnegative", delta_nonnegative);
  run("telescoping", telescoping);
  run("boundary-confidence", boundaries);
  run("incremental-vs-oracle", incremental_vs_oracle);
  run("sweep-shape", sweep_shape);
  run("bpw-cap", bpw_cap);
  run("ablation", ablation);
  run("desync", desync);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
