// SPDX-License-Identifier: Apache-2.0
// Binary n-gram model file.
//
//   "ADLMNG01"
//   u32 order
//   u64 smoothing_k (IEEE-754 bits)
//   u32 token_count, then token_count x (u32 byte length, bytes)
//   for n in [0, order):
//     u64 context_count, then per context (sorted by ids):
//       n x u32 context ids, u64 total, u32 successor_count,
//       successor_count x (u32 token, u64 count)
//   32-byte SHA-256 of everything above
//
// All integers little-endian.
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "adlm/error.hpp"
#include "adlm/ngram.hpp"
#include "sha256.hpp"

namespace adlm {

namespace {

constexpr std::string_view kMagic = "ADLMNG01";

class Writer {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IoError("model file: truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{static_cast<unsigned char>(in_[pos_ + i])} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

struct NgramCodec {
  static std::string write(const NgramModel& m) {
    Writer w;
    w.bytes(kMagic);
    w.u32(static_cast<std::uint32_t>(m.order_));
    w.u64(std::bit_cast<std::uint64_t>(m.smoothing_k_));
    w.u32(static_cast<std::uint32_t>(m.words_.size()));
    for (const auto& word : m.words_) {
      w.u32(static_cast<std::uint32_t>(word.size()));
      w.bytes(word);
    }
    for (const auto& table : m.tables_) {
      std::vector<const NgramModel::Table::value_type*> rows;
      rows.reserve(table.size());
      for (const auto& row : table) rows.push_back(&row);
      std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
      w.u64(rows.size());
      for (const auto* row : rows) {
        for (TokenId id : row->first) w.u32(id);
        w.u64(row->second.total);
        w.u32(static_cast<std::uint32_t>(row->second.successors.size()));
        for (const auto& s : row->second.successors) {
          w.u32(s.token);
          w.u64(s.count);
        }
      }
    }
    std::string body = w.take();
    const auto digest = detail::sha256(body);
    body.append(reinterpret_cast<const char*>(digest.data()), digest.size());
    return body;
  }

  static std::shared_ptr<const NgramModel> read(std::string_view image, std::size_t top_n) {
    if (image.size() < kMagic.size() + 32) throw IoError("model file: too short");
    if (image.substr(0, kMagic.size()) != kMagic) throw IoError("model file: bad magic (expected ADLMNG01)");
    const std::string_view body = image.substr(0, image.size() - 32);
    const auto digest = detail::sha256(body);
    if (std::memcmp(digest.data(), image.data() + body.size(), digest.size()) != 0) {
      throw IoError("model file: content hash mismatch");
    }

    Reader r(body);
    r.bytes(kMagic.size());
    std::shared_ptr<NgramModel> m(new NgramModel());
    const std::uint32_t order = r.u32();
    if (order < 1 || order > 16) throw IoError("model file: unsupported order " + std::to_string(order));
    m->order_ = static_cast<int>(order);
    m->smoothing_k_ = std::bit_cast<double>(r.u64());
    if (!(m->smoothing_k_ > 0.0)) throw IoError("model file: invalid smoothing constant");

    const std::uint32_t count = r.u32();
    if (count <= NgramModel::kFirstWord) throw IoError("model file: empty vocabulary");
    m->words_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t len = r.u32();
      m->words_.emplace_back(r.bytes(len));
      if (!m->index_.emplace(m->words_.back(), i).second) throw IoError("model file: duplicate vocabulary entry");
    }
    if (m->words_[NgramModel::kBos] != "<bos>" || m->words_[NgramModel::kEos] != "<eos>" ||
        m->words_[NgramModel::kUnk] != "<unk>") {
      throw IoError("model file: reserved tokens missing");
    }

    m->tables_.resize(order);
    for (std::uint32_t n = 0; n < order; ++n) {
      const std::uint64_t rows = r.u64();
      for (std::uint64_t i = 0; i < rows; ++i) {
        std::vector<TokenId> key(n);
        for (auto& id : key) {
          id = r.u32();
          if (id >= count) throw IoError("model file: context id out of range");
        }
        NgramModel::ContextStats stats;
        stats.total = r.u64();
        const std::uint32_t succ = r.u32();
        std::uint64_t sum = 0;
        stats.successors.reserve(succ);
        for (std::uint32_t j = 0; j < succ; ++j) {
          NgramModel::Successor s{r.u32(), r.u64()};
          if (s.token >= count || s.token == NgramModel::kBos || s.token == NgramModel::kUnk) {
            throw IoError("model file: successor id out of range");
          }
          sum += s.count;
          stats.successors.push_back(s);
        }
        if (sum != stats.total) throw IoError("model file: context total does not match successor counts");
        m->tables_[n].emplace(std::move(key), std::move(stats));
      }
    }
    if (!r.done()) throw IoError("model file: trailing bytes before hash");
    m->finalize(top_n);
    return m;
  }
};

std::string NgramModel::serialize() const { return NgramCodec::write(*this); }

std::shared_ptr<const NgramModel> NgramModel::deserialize(std::string_view bytes, std::size_t top_n) {
  return NgramCodec::read(bytes, top_n);
}

std::shared_ptr<const NgramModel> NgramModel::load(const std::filesystem::path& path, std::size_t top_n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  std::string image((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading model file '" + path.string() + "'");
  return deserialize(image, top_n);
}

void NgramModel::save(const std::filesystem::path& path) const {
  const std::string image = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out.write(image.data(), static_cast<std::streamsize>(image.size()));
  if (!out) throw IoError("error writing model file '" + path.string() + "'");
}

}  // namespace adlm
