// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace adlm::testing {

std::vector<long double> probs_of(const TokenDistribution& d) {
  std::vector<long double> p;
  p.reserve(d.size());
  for (const auto& e : d.entries()) p.push_back(static_cast<long double>(e.prob));
  return p;
}

namespace {

long double xlogx(long double x) { return x > 0 ? x * std::log(x) : 0.0L; }

long double residual_part(long double r, std::uint64_t unlisted) {
  if (r <= 0 || unlisted == 0) return 0.0L;
  return r * std::log(r / static_cast<long double>(unlisted));
}

}  // namespace

long double oracle_conf_k(const std::vector<long double>& p, std::uint64_t vocab, std::size_t k) {
  long double s = 0, m = 0;
  for (std::size_t i = 0; i < k; ++i) {
    s += xlogx(p[i]);
    m += p[i];
  }
  const long double r = std::max<long double>(0, 1 - m);
  return 1 + (s + residual_part(r, vocab - k)) / std::log(static_cast<long double>(vocab));
}

std::vector<long double> oracle_conf_all(const std::vector<long double>& p, std::uint64_t vocab) {
  std::vector<long double> out(p.size() + 1);
  const long double lv = std::log(static_cast<long double>(vocab));
  long double s = 0, m = 0;
  out[0] = 1 + residual_part(1, vocab) / lv;
  for (std::size_t k = 1; k <= p.size(); ++k) {
    s += xlogx(p[k - 1]);
    m += p[k - 1];
    const long double r = std::max<long double>(0, 1 - m);
    out[k] = 1 + (s + residual_part(r, vocab - k)) / lv;
  }
  return out;
}

long double mp_conf_k(const std::vector<double>& p, std::uint64_t vocab, std::size_t k) {
  using boost::multiprecision::cpp_dec_float_50;
  using boost::multiprecision::log;
  cpp_dec_float_50 s = 0, m = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const cpp_dec_float_50 pi(p[i]);
    if (pi > 0) s += pi * log(pi);
    m += pi;
  }
  cpp_dec_float_50 r = 1 - m;
  if (r > 0 && vocab > k) s += r * log(r / cpp_dec_float_50(vocab - k));
  const cpp_dec_float_50 out = 1 + s / log(cpp_dec_float_50(vocab));
  return static_cast<long double>(out);
}

long double oracle_entropy(const std::vector<long double>& p, std::uint64_t vocab) {
  long double s = 0, m = 0;
  for (auto x : p) {
    s += xlogx(x);
    m += x;
  }
  return -(s + residual_part(std::max<long double>(0, 1 - m), vocab - p.size()));
}

std::vector<std::pair<TokenId, double>> dirichlet(std::size_t n, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> g(n);
  double total = 0;
  for (auto& x : g) {
    x = gamma(rng);
    total += x;
  }
  if (!(total > 0)) {
    std::fill(g.begin(), g.end(), 1.0);
    total = static_cast<double>(n);
  }
  std::vector<std::pair<TokenId, double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {static_cast<TokenId>(i), g[i] / total};
  return out;
}

std::vector<std::pair<TokenId, double>> zipf(std::size_t n, double s) {
  std::vector<std::pair<TokenId, double>> out(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += 1.0 / std::pow(static_cast<double>(i + 1), s);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {static_cast<TokenId>(i), 1.0 / std::pow(static_cast<double>(i + 1), s) / total};
  }
  return out;
}

TokenDistribution random_distribution(std::mt19937_64& rng, std::uint64_t max_vocab) {
  std::uniform_int_distribution<std::uint64_t> vocab_dist(2, max_vocab);
  const std::uint64_t vocab = vocab_dist(rng);
  std::vector<std::pair<TokenId, double>> entries;
  const auto shape = rng() % 4;
  if (shape == 0) {
    std::uniform_real_distribution<double> s_dist(0.5, 2.0);
    entries = zipf(vocab, s_dist(rng));
  } else {
    static constexpr double kAlphas[] = {0.05, 0.3, 1.0};
    entries = dirichlet(vocab, kAlphas[shape - 1], rng);
  }
  // Shuffle ids so ordering comes from the probabilities, not the labels.
  std::vector<TokenId> ids(vocab);
  std::iota(ids.begin(), ids.end(), TokenId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].first = ids[i];

  std::size_t top_n = entries.size();
  if (rng() % 3 == 0) top_n = 1 + rng() % entries.size();
  return TokenDistribution::make(vocab, entries, top_n);
}

}  // namespace adlm::testing
