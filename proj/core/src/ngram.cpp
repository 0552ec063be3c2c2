// SPDX-License-Identifier: Apache-2.0
#include "adlm/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "adlm/error.hpp"
#include "sha256.hpp"

namespace adlm {

namespace {

const std::string kReservedNames[] = {"<bos>", "<eos>", "<unk>"};

bool is_blank(char c) noexcept { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

template <typename Fn>
void for_each_word(std::string_view line, Fn&& fn) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_blank(line[j])) ++j;
    if (j > i) fn(line.substr(i, j - i));
    i = j;
  }
}

bool is_reserved_name(std::string_view w) {
  return std::find(std::begin(kReservedNames), std::end(kReservedNames), w) != std::end(kReservedNames);
}

}  // namespace

std::size_t NgramModel::KeyHash::operator()(const std::vector<TokenId>& key) const noexcept {
  // FNV-1a over the ids.
  std::uint64_t h = 1469598103934665603ull;
  for (TokenId id : key) {
    h ^= id;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::shared_ptr<const NgramModel> NgramModel::train(std::istream& corpus, int order, double smoothing_k,
                                                    std::size_t top_n) {
  if (order < 1) throw InvalidArgument("train_ngram: order must be at least 1");
  if (!(smoothing_k > 0.0) || !std::isfinite(smoothing_k)) {
    throw InvalidArgument("train_ngram: smoothing_k must be positive");
  }

  std::vector<std::vector<std::string>> sentences;
  std::set<std::string> vocab;
  std::string line;
  while (std::getline(corpus, line)) {
    std::vector<std::string> words;
    for_each_word(line, [&](std::string_view w) {
      words.emplace_back(w);
      if (!is_reserved_name(w)) vocab.emplace(w);
    });
    if (!words.empty()) sentences.push_back(std::move(words));
  }
  if (corpus.bad()) throw IoError("train_ngram: error while reading corpus");
  if (vocab.empty()) throw InvalidArgument("train_ngram: corpus contains no words");

  std::shared_ptr<NgramModel> model(new NgramModel());
  model->order_ = order;
  model->smoothing_k_ = smoothing_k;
  model->words_.assign(std::begin(kReservedNames), std::end(kReservedNames));
  model->words_.insert(model->words_.end(), vocab.begin(), vocab.end());
  for (TokenId id = 0; id < model->words_.size(); ++id) model->index_.emplace(model->words_[id], id);

  // Counts are gathered in ordered maps so successor lists come out sorted by id.
  std::vector<std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>>> raw(order);
  const std::size_t pad = static_cast<std::size_t>(order - 1);
  std::vector<TokenId> seq;
  for (const auto& sentence : sentences) {
    seq.assign(pad, kBos);
    for (const auto& w : sentence) {
      auto it = model->index_.find(w);
      seq.push_back(it == model->index_.end() || is_reserved_name(w) ? kUnk : it->second);
    }
    seq.push_back(kEos);
    for (std::size_t j = pad; j < seq.size(); ++j) {
      if (seq[j] == kUnk) continue;
      for (std::size_t n = 0; n <= pad; ++n) {
        std::vector<TokenId> key(seq.begin() + static_cast<std::ptrdiff_t>(j - n),
                                 seq.begin() + static_cast<std::ptrdiff_t>(j));
        ++raw[n][std::move(key)][seq[j]];
      }
    }
  }

  model->tables_.resize(order);
  for (int n = 0; n < order; ++n) {
    for (auto& [key, succ] : raw[n]) {
      ContextStats stats;
      for (auto [tok, c] : succ) {
        stats.total += c;
        stats.successors.push_back({tok, c});
      }
      model->tables_[n].emplace(key, std::move(stats));
    }
  }
  model->finalize(top_n);
  return model;
}

std::shared_ptr<const NgramModel> NgramModel::untrained(std::vector<std::string> words, int order,
                                                        double smoothing_k, std::size_t top_n) {
  if (order < 1) throw InvalidArgument("ngram: order must be at least 1");
  if (!(smoothing_k > 0.0) || !std::isfinite(smoothing_k)) throw InvalidArgument("ngram: smoothing_k must be positive");
  std::set<std::string> vocab;
  for (auto& w : words) {
    if (w.empty() || is_reserved_name(w)) throw InvalidArgument("ngram: invalid vocabulary word '" + w + "'");
    vocab.insert(std::move(w));
  }
  if (vocab.empty()) throw InvalidArgument("ngram: vocabulary is empty");
  std::shared_ptr<NgramModel> model(new NgramModel());
  model->order_ = order;
  model->smoothing_k_ = smoothing_k;
  model->words_.assign(std::begin(kReservedNames), std::end(kReservedNames));
  model->words_.insert(model->words_.end(), vocab.begin(), vocab.end());
  for (TokenId id = 0; id < model->words_.size(); ++id) model->index_.emplace(model->words_[id], id);
  model->tables_.resize(order);
  model->finalize(top_n);
  return model;
}

std::shared_ptr<const NgramModel> NgramModel::train_file(const std::filesystem::path& corpus_path, int order,
                                                         double smoothing_k, std::size_t top_n) {
  std::ifstream in(corpus_path);
  if (!in) throw IoError("train_ngram: cannot read corpus '" + corpus_path.string() + "'");
  return train(in, order, smoothing_k, top_n);
}

void NgramModel::finalize(std::size_t top_n) {
  if (top_n < 2) throw InvalidArgument("ngram: top_n must be at least 2");
  for (auto& table : tables_) {
    for (auto& [key, stats] : table) {
      std::sort(stats.successors.begin(), stats.successors.end(), [](const Successor& a, const Successor& b) {
        return a.count != b.count ? a.count > b.count : a.token < b.token;
      });
    }
  }
  sentence_final_.assign(words_.size(), false);
  sentence_final_[kEos] = true;
  for (TokenId id = kFirstWord; id < words_.size(); ++id) {
    const char last = words_[id].back();
    sentence_final_[id] = last == '.' || last == '!' || last == '?';
  }
  descriptor_.kind = ProviderKind::builtin_ngram;
  descriptor_.vocab_size = words_.size() - 2;  // everything but <bos> and <unk>
  descriptor_.top_n = top_n;
  // The id is the content hash of the serialized form.
  const std::string image = serialize();
  descriptor_.model_id = detail::to_hex(detail::sha256(std::string_view(image).substr(0, image.size() - 32)));
}

const std::string& NgramModel::word(TokenId id) const {
  if (id >= words_.size()) throw InvalidArgument("ngram: unknown token id " + std::to_string(id));
  return words_[id];
}

std::optional<TokenId> NgramModel::find(std::string_view w) const {
  auto it = index_.find(std::string(w));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void NgramModel::validate_ids(std::span<const TokenId> ctx) const {
  for (TokenId id : ctx) {
    if (id >= words_.size()) throw InvalidArgument("ngram: unknown token id " + std::to_string(id));
  }
}

const NgramModel::ContextStats& NgramModel::lookup(std::span<const TokenId> ctx) const {
  static const ContextStats kEmpty;
  // Only the current sentence conditions the next token.
  auto eos = std::find(ctx.rbegin(), ctx.rend(), kEos);
  const std::span<const TokenId> local = ctx.subspan(static_cast<std::size_t>(ctx.rend() - eos));

  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> padded(width, kBos);
  const std::size_t take = std::min(width, local.size());
  std::copy(local.end() - static_cast<std::ptrdiff_t>(take), local.end(),
            padded.end() - static_cast<std::ptrdiff_t>(take));

  std::vector<TokenId> key;
  for (std::size_t n = width; n >= 1; --n) {
    key.assign(padded.end() - static_cast<std::ptrdiff_t>(n), padded.end());
    auto it = tables_[n].find(key);
    if (it != tables_[n].end() && it->second.total > 0) return it->second;
  }
  key.clear();
  auto it = tables_[0].find(key);
  return it == tables_[0].end() ? kEmpty : it->second;
}

TokenDistribution NgramModel::next_distribution(std::span<const TokenId> ctx) const {
  validate_ids(ctx);
  const ContextStats& stats = lookup(ctx);
  const double vocab = static_cast<double>(descriptor_.vocab_size);
  const double denom = static_cast<double>(stats.total) + smoothing_k_ * vocab;
  const std::size_t top_n = descriptor_.top_n;

  std::vector<std::pair<TokenId, double>> entries;
  entries.reserve(std::min<std::size_t>(top_n, descriptor_.vocab_size));
  std::vector<TokenId> seen;
  seen.reserve(stats.successors.size());
  for (const auto& s : stats.successors) {
    if (entries.size() == top_n) break;
    entries.emplace_back(s.token, (static_cast<double>(s.count) + smoothing_k_) / denom);
    seen.push_back(s.token);
  }
  std::sort(seen.begin(), seen.end());
  const double unseen_p = smoothing_k_ / denom;
  for (TokenId id = kEos; id < words_.size() && entries.size() < top_n; ++id) {
    if (id == kUnk) continue;
    if (std::binary_search(seen.begin(), seen.end(), id)) continue;
    entries.emplace_back(id, unseen_p);
  }
  return TokenDistribution::make(descriptor_.vocab_size, entries, top_n);
}

double NgramModel::token_probability(std::span<const TokenId> ctx, TokenId token) const {
  validate_ids(ctx);
  if (token >= words_.size()) throw InvalidArgument("ngram: unknown token id " + std::to_string(token));
  if (token == kBos || token == kUnk) return 0.0;
  const ContextStats& stats = lookup(ctx);
  std::uint64_t count = 0;
  for (const auto& s : stats.successors) {
    if (s.token == token) {
      count = s.count;
      break;
    }
  }
  const double denom = static_cast<double>(stats.total) + smoothing_k_ * static_cast<double>(descriptor_.vocab_size);
  return (static_cast<double>(count) + smoothing_k_) / denom;
}

std::vector<double> NgramModel::full_distribution(std::span<const TokenId> ctx) const {
  validate_ids(ctx);
  const ContextStats& stats = lookup(ctx);
  const double denom = static_cast<double>(stats.total) + smoothing_k_ * static_cast<double>(descriptor_.vocab_size);
  std::vector<double> p(words_.size(), smoothing_k_ / denom);
  p[kBos] = 0.0;
  p[kUnk] = 0.0;
  for (const auto& s : stats.successors) p[s.token] = (static_cast<double>(s.count) + smoothing_k_) / denom;
  return p;
}

TokenContext NgramModel::tokenize(std::string_view text) const {
  TokenContext ids;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    for_each_word(line, [&](std::string_view w) {
      if (w == "<eos>") {
        ids.push_back(kEos);
        return;
      }
      auto it = index_.find(std::string(w));
      ids.push_back(it == index_.end() || it->second == kBos ? kUnk : it->second);
    });
    if (nl == std::string_view::npos) break;
    ids.push_back(kEos);
    start = nl + 1;
  }
  return ids;
}

std::string NgramModel::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == kEos) {
      out.push_back('\n');
      continue;
    }
    if (!out.empty() && out.back() != '\n') out.push_back(' ');
    out += word(id);
  }
  return out;
}

bool NgramModel::ends_sentence(TokenId token) const {
  return token < sentence_final_.size() && sentence_final_[token];
}

}  // namespace adlm
