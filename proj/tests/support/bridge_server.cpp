// SPDX-License-Identifier: Apache-2.0
#include "bridge_server.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace adlm::testing {

namespace {

constexpr std::size_t kMaxTopN = 4096;

std::string decimal(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace

BridgeServer::BridgeServer(std::shared_ptr<const NgramModel> model, std::string model_id)
    : model_(std::move(model)), model_id_(std::move(model_id)) {
  if (model_id_.empty()) model_id_ = "ngram-bridge-" + model_->descriptor().model_id.substr(0, 16);
}

std::string BridgeServer::handle(std::string_view line) {
  nlohmann::json out;
  out["ok"] = false;
  try {
    const auto req = nlohmann::json::parse(line);
    const std::string op = req.at("op").get<std::string>();
    ++served_;
    out["model_id"] = drift_after_ != 0 && served_ > drift_after_ ? model_id_ + "-drifted" : model_id_;
    if (op == "describe") {
      out["vocab_size"] = model_->token_count();
    } else if (op == "tokenize") {
      out["tokens"] = model_->tokenize(req.at("text").get<std::string>());
    } else if (op == "detokenize") {
      const auto ids = req.at("ctx").get<std::vector<TokenId>>();
      out["text"] = model_->detokenize(ids);
    } else if (op == "next_dist") {
      const auto ctx = req.at("ctx").get<std::vector<TokenId>>();
      const auto top_n = req.at("top_n").get<std::size_t>();
      if (top_n == 0 || top_n > kMaxTopN) throw std::runtime_error("top_n out of range");
      const auto full = model_->full_distribution(ctx);
      std::vector<TokenId> order(full.size());
      std::iota(order.begin(), order.end(), TokenId{0});
      std::erase_if(order, [&](TokenId t) { return !(full[t] > 0.0); });
      std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) { return full[a] > full[b]; });
      if (order.size() > top_n) order.resize(top_n);
      std::vector<std::string> probs;
      for (TokenId t : order) probs.push_back(decimal(full[t]));
      out["tokens"] = order;
      out["probs"] = probs;
    } else {
      throw std::runtime_error("unknown op '" + op + "'");
    }
    out["ok"] = true;
  } catch (const std::exception& e) {
    out = nlohmann::json{{"ok", false}, {"error", e.what()}};
  }
  return out.dump();
}

void serve(BridgeServer& server, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    out << server.handle(line) << '\n' << std::flush;
  }
}

}  // namespace adlm::testing
