// SPDX-License-Identifier: Apache-2.0
#include "adlm/bridge_client.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "adlm/error.hpp"

namespace adlm {

namespace bridge {

namespace {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::describe: return "describe";
    case Op::tokenize: return "tokenize";
    case Op::detokenize: return "detokenize";
    case Op::next_dist: return "next_dist";
  }
  return "describe";
}

}  // namespace

std::string encode(const Request& req) {
  nlohmann::json j;
  j["op"] = op_name(req.op);
  switch (req.op) {
    case Op::describe: break;
    case Op::tokenize: j["text"] = req.text; break;
    case Op::detokenize: j["ctx"] = req.ctx; break;
    case Op::next_dist:
      j["ctx"] = req.ctx;
      j["top_n"] = req.top_n;
      break;
  }
  return j.dump();
}

double parse_probability(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw TransportError("bridge: malformed probability '" + std::string(text) + "'");
  }
  if (!(v > 0.0 && v <= 1.0)) throw TransportError("bridge: probability '" + std::string(text) + "' outside (0, 1]");
  return v;
}

Response parse_response(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("bridge: malformed response: ") + e.what());
  }
  if (!j.is_object()) throw TransportError("bridge: response is not a JSON object");

  Response r;
  try {
    r.ok = j.at("ok").get<bool>();
    if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
    if (!r.ok) return r;
    if (j.contains("model_id")) r.model_id = j["model_id"].get<std::string>();
    if (j.contains("vocab_size")) r.vocab_size = j["vocab_size"].get<std::uint64_t>();
    if (j.contains("tokens")) r.tokens = j["tokens"].get<std::vector<TokenId>>();
    if (j.contains("probs")) r.probs = j["probs"].get<std::vector<std::string>>();
    if (j.contains("text")) r.text = j["text"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("bridge: response field has the wrong type: ") + e.what());
  }

  if (!r.probs.empty() || j.contains("probs")) {
    if (r.probs.size() != r.tokens.size()) throw TransportError("bridge: tokens and probs differ in length");
    double prev = 1.0;
    for (const auto& p : r.probs) {
      const double v = parse_probability(p);
      if (v > prev) throw TransportError("bridge: probabilities are not in descending order");
      prev = v;
    }
  }
  return r;
}

}  // namespace bridge

BridgeClient::BridgeClient(std::unique_ptr<LineTransport> transport, std::size_t top_n)
    : transport_(std::move(transport)) {
  if (!transport_) throw InvalidArgument("bridge: null transport");
  if (top_n < 2 || top_n > bridge::kMaxTopN) throw InvalidArgument("bridge: top_n must lie in [2, 4096]");
  bridge::Request req;
  req.op = bridge::Op::describe;
  const auto r = call(req);
  if (r.model_id.empty()) throw TransportError("bridge: describe returned an empty model_id");
  if (r.vocab_size < 2) throw TransportError("bridge: describe returned vocab_size < 2");
  descriptor_.kind = ProviderKind::bridge;
  descriptor_.model_id = r.model_id;
  descriptor_.vocab_size = r.vocab_size;
  descriptor_.top_n = top_n;
}

bridge::Response BridgeClient::call(const bridge::Request& req) const {
  std::string reply;
  {
    std::lock_guard lock(mu_);
    transport_->send_line(bridge::encode(req));
    reply = transport_->read_line();
  }
  auto r = bridge::parse_response(reply);
  if (!r.ok) throw TransportError("bridge error: " + (r.error.empty() ? std::string("unspecified") : r.error));
  if (!descriptor_.model_id.empty() && !r.model_id.empty() && r.model_id != descriptor_.model_id) {
    throw ModelMismatch("bridge now reports model '" + r.model_id + "' but the session began with '" +
                        descriptor_.model_id + "'");
  }
  return r;
}

TokenDistribution BridgeClient::next_distribution(std::span<const TokenId> ctx) const {
  bridge::Request req;
  req.op = bridge::Op::next_dist;
  req.ctx.assign(ctx.begin(), ctx.end());
  req.top_n = descriptor_.top_n;
  const auto r = call(req);
  if (r.tokens.empty()) throw TransportError("bridge: next_dist returned no tokens");
  if (r.tokens.size() > descriptor_.top_n) throw TransportError("bridge: next_dist returned more than top_n tokens");
  std::vector<std::pair<TokenId, double>> entries;
  entries.reserve(r.tokens.size());
  for (std::size_t i = 0; i < r.tokens.size(); ++i) {
    if (r.tokens[i] >= descriptor_.vocab_size) {
      throw TransportError("bridge: token id " + std::to_string(r.tokens[i]) + " outside the vocabulary");
    }
    entries.emplace_back(r.tokens[i], bridge::parse_probability(r.probs[i]));
  }
  try {
    return TokenDistribution::make(descriptor_.vocab_size, entries, descriptor_.top_n);
  } catch (const InvalidArgument& e) {
    throw TransportError(std::string("bridge: invalid distribution: ") + e.what());
  }
}

double BridgeClient::token_probability(std::span<const TokenId> ctx, TokenId token) const {
  const auto dist = next_distribution(ctx);
  for (const auto& e : dist.entries()) {
    if (e.token == token) return e.prob;
  }
  // Unlisted tokens share the residual mass evenly.
  const auto unlisted = dist.vocab_size() - dist.size();
  return unlisted == 0 ? 0.0 : dist.residual() / static_cast<double>(unlisted);
}

TokenContext BridgeClient::tokenize(std::string_view text) const {
  bridge::Request req;
  req.op = bridge::Op::tokenize;
  req.text = std::string(text);
  auto r = call(req);
  for (TokenId t : r.tokens) {
    if (t >= descriptor_.vocab_size) throw TransportError("bridge: tokenize produced an out-of-range id");
  }
  return std::move(r.tokens);
}

std::string BridgeClient::detokenize(std::span<const TokenId> ids) const {
  bridge::Request req;
  req.op = bridge::Op::detokenize;
  req.ctx.assign(ids.begin(), ids.end());
  auto r = call(req);
  if (!r.text) throw TransportError("bridge: detokenize response has no text");
  return std::move(*r.text);
}

bool BridgeClient::ends_sentence(TokenId token) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = sentence_final_cache_.find(token); it != sentence_final_cache_.end()) return it->second;
  }
  const bool v = LanguageModel::ends_sentence(token);
  std::lock_guard lock(mu_);
  sentence_final_cache_.emplace(token, v);
  return v;
}

}  // namespace adlm
