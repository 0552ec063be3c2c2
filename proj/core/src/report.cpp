// SPDX-License-Identifier: Apache-2.0
#include "adlm/report.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

namespace adlm::report {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
  return std::string(buf, res.ptr);
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string to_csv(const metrics::SweepReport& r) {
  std::string out = "epsilon,mean_pool_size,stddev,samples,steps\n";
  for (const auto& row : r.rows) {
    out += shortest(row.epsilon) + "," + fixed(row.mean_pool_size, 4) + "," + fixed(row.stddev, 4) + "," +
           std::to_string(row.samples) + "," + std::to_string(row.steps) + "\n";
  }
  return out;
}

std::string to_json(const metrics::SweepReport& r) {
  nlohmann::ordered_json j;
  j["format_version"] = r.format_version;
  j["kind"] = "sweep";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["epsilon"] = row.epsilon;
    o["mean_pool_size"] = row.mean_pool_size;
    o["stddev"] = row.stddev;
    o["samples"] = row.samples;
    o["steps"] = row.steps;
    j["rows"].push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const metrics::EvalReport& r) {
  std::set<unsigned> caps;
  for (const auto& row : r.rows) caps.insert(row.bpw);
  std::string out = "variant,metric";
  for (unsigned c : caps) out += ",bpw=" + std::to_string(c);
  out += "\n";
  for (auto variant : {metrics::Variant::adaptive, metrics::Variant::ablation}) {
    std::map<unsigned, const metrics::EvalRow*> by_cap;
    for (const auto& row : r.rows) {
      if (row.variant == variant) by_cap[row.bpw] = &row;
    }
    if (by_cap.empty()) continue;
    for (const char* metric : {"PPL", "Distinct"}) {
      out += std::string(metrics::to_string(variant)) + "," + metric;
      for (unsigned c : caps) {
        out += ",";
        auto it = by_cap.find(c);
        if (it == by_cap.end() || it->second->sample_count == 0) continue;
        out += metric[0] == 'P' ? fixed(it->second->ppl, 2) : fixed(it->second->distinct, 4);
      }
      out += "\n";
    }
  }
  return out;
}

std::string to_json(const metrics::EvalReport& r) {
  nlohmann::ordered_json j;
  j["format_version"] = r.format_version;
  j["kind"] = "eval";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["variant"] = metrics::to_string(row.variant);
    o["bpw"] = row.bpw;
    o["ppl"] = row.ppl;
    o["distinct"] = row.distinct;
    o["distinct1"] = row.distinct1;
    o["measured_bpw"] = row.measured_bpw;
    o["max_step_bits"] = row.max_step_bits;
    o["sample_count"] = row.sample_count;
    o["failures"] = row.failures;
    j["rows"].push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string to_csv(std::span<const metrics::LabeledText> corpus) {
  std::string out = "id,label,text\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out += std::to_string(i) + "," + corpus[i].label + "," + quote_csv(corpus[i].text) + "\n";
  }
  return out;
}

}  // namespace adlm::report
