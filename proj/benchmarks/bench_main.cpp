// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "adlm/codec.hpp"
#include "adlm/entropy.hpp"
#include "adlm/metrics.hpp"
#include "adlm/ngram.hpp"

using namespace adlm;

namespace {

// Zipf(1.1) over `n` tokens.
TokenDistribution zipf(std::size_t n) {
  std::vector<std::pair<TokenId, double>> e;
  double z = 0;
  for (std::size_t i = 1; i <= n; ++i) z += std::pow(static_cast<double>(i), -1.1);
  for (std::size_t i = 1; i <= n; ++i) {
    e.emplace_back(static_cast<TokenId>(i - 1), std::pow(static_cast<double>(i), -1.1) / z);
  }
  return TokenDistribution::make(n, e);
}

// A small grammar corpus, so the benchmarks need no data files.
std::string corpus(std::size_t sentences) {
  const char* subj[] = {"the old man", "she", "anna", "the dog", "a stranger", "my brother", "the teacher"};
  const char* verb[] = {"saw", "found", "left", "wanted", "carried", "painted", "remembered", "sold"};
  const char* obj[] = {"the house", "a letter", "the river", "her coat", "the boat", "a small bird", "the key"};
  const char* tail[] = {"", " in the morning", " at night", " again", " near the station", " without a word"};
  std::mt19937_64 rng(7);
  std::ostringstream out;
  for (std::size_t i = 0; i < sentences; ++i) {
    out << subj[rng() % 7] << ' ' << verb[rng() % 8] << ' ' << obj[rng() % 7] << tail[rng() % 6] << " .\n";
  }
  return out.str();
}

const NgramModel& model() {
  static const auto m = [] {
    std::istringstream in(corpus(20000));
    return NgramModel::train(in);
  }();
  return *m;
}

void BM_Truncate(benchmark::State& state) {
  const auto dist = zipf(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(entropy::truncate(dist, 1e-3, 4096));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Truncate)->Arg(64)->Arg(512)->Arg(4096);

void BM_TruncateFullScan(benchmark::State& state) {
  const auto dist = zipf(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(entropy::truncate(dist, 0.0, dist.size()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TruncateFullScan)->Arg(512)->Arg(4096);

void BM_NextDistribution(benchmark::State& state) {
  const auto& m = model();
  const auto ctx = m.tokenize("the old man saw");
  for (auto _ : state) benchmark::DoNotOptimize(m.next_distribution(ctx));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NextDistribution);

void BM_Embed(benchmark::State& state) {
  const auto& m = model();
  StegoKey key;
  key.prefix = "the old man";
  key.model_id = m.descriptor().model_id;
  const auto payload = metrics::random_payloads(1, state.range(0), state.range(0), 1).front();
  std::size_t tokens = 0;
  for (auto _ : state) {
    const auto st = codec::embed_message(key, payload, m);
    tokens += st.token_ids.size();
    benchmark::DoNotOptimize(st);
  }
  state.SetBytesProcessed(state.iterations() * state.range(0));
  state.counters["tokens/s"] = benchmark::Counter(static_cast<double>(tokens), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Embed)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Extract(benchmark::State& state) {
  const auto& m = model();
  StegoKey key;
  key.prefix = "the old man";
  key.model_id = m.descriptor().model_id;
  const auto payload = metrics::random_payloads(1, 64, 64, 2).front();
  const auto st = codec::embed_message(key, payload, m);
  for (auto _ : state) benchmark::DoNotOptimize(codec::extract_tokens(key, st.token_ids, m));
  state.SetBytesProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Extract)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
