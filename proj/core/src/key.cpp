// SPDX-License-Identifier: Apache-2.0
#include "adlm/key.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "adlm/error.hpp"

namespace adlm {

void StegoKey::validate() const {
  if (prefix.empty()) throw InvalidArgument("key: prefix must not be empty");
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw InvalidArgument("key: epsilon must be finite and >= 0");
  if (max_pool == 0) throw InvalidArgument("key: max_pool must be at least 1");
  if (max_bits_per_step && (*max_bits_per_step < 1 || *max_bits_per_step > 16)) {
    throw InvalidArgument("key: max_bits_per_step must lie in [1, 16]");
  }
  if (header_bits != 16 && header_bits != 32) throw InvalidArgument("key: header_bits must be 16 or 32");
}

StegoKey parse_key(std::string_view json_text) {
  static const std::set<std::string> kFields = {"prefix",        "epsilon",     "model_id",         "max_pool",
                                                "max_bits_per_step", "header_bits", "delta_double_norm"};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("key: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("key: document must be a JSON object");
  for (const auto& [name, value] : j.items()) {
    if (!kFields.contains(name)) throw InvalidArgument("key: unknown field '" + name + "'");
  }

  StegoKey k;
  try {
    k.prefix = j.at("prefix").get<std::string>();
    k.model_id = j.at("model_id").get<std::string>();
    if (j.contains("epsilon")) k.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_pool")) k.max_pool = j["max_pool"].get<std::size_t>();
    if (j.contains("max_bits_per_step") && !j["max_bits_per_step"].is_null()) {
      k.max_bits_per_step = j["max_bits_per_step"].get<unsigned>();
    }
    if (j.contains("header_bits")) k.header_bits = j["header_bits"].get<unsigned>();
    if (j.contains("delta_double_norm")) k.delta_double_norm = j["delta_double_norm"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("key: ") + e.what());
  }
  if (k.model_id.empty()) throw InvalidArgument("key: model_id must not be empty");
  k.validate();
  return k;
}

std::string key_to_json(const StegoKey& key) {
  nlohmann::ordered_json j;
  j["prefix"] = key.prefix;
  j["epsilon"] = key.epsilon;
  j["model_id"] = key.model_id;
  j["max_pool"] = key.max_pool;
  if (key.max_bits_per_step) {
    j["max_bits_per_step"] = *key.max_bits_per_step;
  } else {
    j["max_bits_per_step"] = nullptr;
  }
  j["header_bits"] = key.header_bits;
  j["delta_double_norm"] = key.delta_double_norm;
  return j.dump(2) + "\n";
}

StegoKey load_key(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read key file '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_key(text);
}

void save_key(const StegoKey& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write key file '" + path.string() + "'");
  out << key_to_json(key);
  if (!out) throw IoError("error writing key file '" + path.string() + "'");
}

}  // namespace adlm
