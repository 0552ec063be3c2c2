// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adlm/provider.hpp"

namespace adlm {

/// Word-level n-gram model with add-k smoothing.
///
/// Ids 0..2 are reserved for <bos>, <eos> and <unk>; words follow in
/// lexicographic order. Every token except <bos> and <unk> is predictable, so
/// the model's |V| is word count + 1. A context never seen in training backs
/// off to its longest suffix that was seen; the conditional for the chosen
/// context is (count + k) / (total + k |V|).
///
/// Text maps to tokens by splitting on blanks; a line break is <eos>.
class NgramModel final : public LanguageModel {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kFirstWord = 3;

  static constexpr int kDefaultOrder = 3;
  static constexpr double kDefaultSmoothing = 0.01;

  /// Trains on one sentence per non-blank line. Throws InvalidArgument when
  /// order < 1, smoothing_k is not positive, or the corpus has no words.
  static std::shared_ptr<const NgramModel> train(std::istream& corpus, int order = kDefaultOrder,
                                                 double smoothing_k = kDefaultSmoothing,
                                                 std::size_t top_n = kDefaultTopN);
  /// A model that knows `words` but has no counts: every context predicts the
  /// uniform distribution.
  static std::shared_ptr<const NgramModel> untrained(std::vector<std::string> words, int order = kDefaultOrder,
                                                     double smoothing_k = kDefaultSmoothing,
                                                     std::size_t top_n = kDefaultTopN);
  static std::shared_ptr<const NgramModel> train_file(const std::filesystem::path& corpus_path,
                                                      int order = kDefaultOrder,
                                                      double smoothing_k = kDefaultSmoothing,
                                                      std::size_t top_n = kDefaultTopN);

  /// Model file: "ADLMNG01" magic, little-endian body, trailing SHA-256 of
  /// everything before it. The hex digest is the model id.
  static std::shared_ptr<const NgramModel> load(const std::filesystem::path& path,
                                                std::size_t top_n = kDefaultTopN);
  static std::shared_ptr<const NgramModel> deserialize(std::string_view bytes, std::size_t top_n = kDefaultTopN);
  void save(const std::filesystem::path& path) const;
  /// Full file image, hash included.
  std::string serialize() const;

  // LanguageModel
  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  TokenDistribution next_distribution(std::span<const TokenId> ctx) const override;
  double token_probability(std::span<const TokenId> ctx, TokenId token) const override;
  TokenContext tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> ids) const override;
  std::optional<TokenId> eos_token() const override { return kEos; }
  std::optional<TokenId> unk_token() const override { return kUnk; }
  bool ends_sentence(TokenId token) const override;

  int order() const noexcept { return order_; }
  double smoothing_k() const noexcept { return smoothing_k_; }
  /// Total number of ids, reserved ones included.
  std::size_t token_count() const noexcept { return words_.size(); }
  const std::string& word(TokenId id) const;
  std::optional<TokenId> find(std::string_view word) const;

  /// Every predictable token's probability after `ctx`; index = token id,
  /// reserved non-predictable ids hold 0.
  std::vector<double> full_distribution(std::span<const TokenId> ctx) const;

  struct Successor {
    TokenId token;
    std::uint64_t count;
  };
  struct ContextStats {
    std::uint64_t total = 0;
    std::vector<Successor> successors;  ///< sorted by (count desc, id asc)
  };

 private:
  NgramModel() = default;

  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  using Table = std::unordered_map<std::vector<TokenId>, ContextStats, KeyHash>;

  void finalize(std::size_t top_n);
  void validate_ids(std::span<const TokenId> ctx) const;
  /// Stats for the longest seen suffix of the sentence-local context.
  const ContextStats& lookup(std::span<const TokenId> ctx) const;

  int order_ = kDefaultOrder;
  double smoothing_k_ = kDefaultSmoothing;
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<Table> tables_;  ///< tables_[n] holds contexts of length n
  ProviderDescriptor descriptor_;
  std::vector<bool> sentence_final_;

  friend struct NgramCodec;
};

}  // namespace adlm
