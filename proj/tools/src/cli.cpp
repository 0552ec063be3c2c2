// SPDX-License-Identifier: Apache-2.0
#include "adlm_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "adlm/bridge_client.hpp"
#include "adlm/codec.hpp"
#include "adlm/error.hpp"
#include "adlm/key.hpp"
#include "adlm/metrics.hpp"
#include "adlm/ngram.hpp"
#include "adlm/report.hpp"
#include "adlm/transport.hpp"

namespace adlm::cli {

namespace {

constexpr const char* kBridgeEnv = "ADLM_BRIDGE_ENDPOINT";

enum class LogLevel { quiet, info, debug };

class Log {
 public:
  Log(std::ostream& err, const LogLevel& level) : err_(err), level_(level) {}
  std::ostream* info() { return level_ >= LogLevel::info ? &err_ : nullptr; }
  std::ostream* debug() { return level_ >= LogLevel::debug ? &err_ : nullptr; }
  std::ostream& error() { return err_; }

 private:
  std::ostream& err_;
  const LogLevel& level_;
};

struct ProviderSpec {
  std::string model;
  std::string bridge;
  std::size_t top_n = kDefaultTopN;
};

struct Config {
  LogLevel log_level = LogLevel::info;
  ProviderSpec provider;
  std::string key_path;
  std::string in_path;
  std::string out_path;
  std::string trace_path;
  bool entropy_bits = false;
  std::uint64_t seed = 0;
  std::string format = "csv";

  // train-lm
  std::string corpus;
  int order = NgramModel::kDefaultOrder;
  double smoothing = NgramModel::kDefaultSmoothing;
  std::string key_out;
  std::string prefix;
  double epsilon = kDefaultEpsilon;
  std::size_t max_pool = kDefaultMaxPool;
  unsigned max_bits = 0;  // 0 = unlimited
  unsigned header_bits = kDefaultHeaderBits;
  bool delta_double_norm = false;

  // embed / extract
  std::string policy = "adaptive";

  // sweep
  std::vector<double> epsilons{0.0005, 0.001, 0.002, 0.004, 0.008};
  std::vector<std::string> prefixes;
  std::size_t samples = 200;
  std::size_t steps = 40;
  unsigned threads = 1;

  // eval / export-corpus
  std::vector<unsigned> bpw{1, 2, 3, 4};
  std::size_t payloads = 100;
  std::size_t min_bytes = 1;
  std::size_t max_bytes = 16;
  bool no_ablation = false;
};

std::string read_all(std::istream& s) {
  return std::string(std::istreambuf_iterator<char>(s), std::istreambuf_iterator<char>());
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty() || path == "-") return read_all(in);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  return read_all(f);
}

void write_output(const std::string& path, std::string_view data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f.flush()) throw IoError("write failed: " + path);
}

std::shared_ptr<const LanguageModel> open_provider(const ProviderSpec& spec, Log& log) {
  if (!spec.model.empty()) {
    auto m = NgramModel::load(spec.model, spec.top_n);
    if (auto* s = log.debug()) *s << "model " << m->descriptor().model_id << " from " << spec.model << '\n';
    return m;
  }
  std::string endpoint = spec.bridge;
  if (endpoint.empty()) {
    if (const char* env = std::getenv(kBridgeEnv)) endpoint = env;
  }
  if (endpoint.empty()) {
    throw InvalidArgument(std::string("no provider: pass --model or --bridge, or set ") + kBridgeEnv);
  }
  auto client = std::make_shared<BridgeClient>(open_endpoint(endpoint), spec.top_n);
  if (auto* s = log.debug()) *s << "bridge " << client->descriptor().model_id << " at " << endpoint << '\n';
  return client;
}

codec::PoolPolicy parse_policy(const std::string& s) {
  return s == "fixed" ? codec::PoolPolicy::fixed : codec::PoolPolicy::adaptive;
}

// Trace records go to a file as they are produced.
class TraceFile {
 public:
  TraceFile(const std::string& path, bool entropy_bits) : bits_(entropy_bits) {
    if (path.empty()) return;
    file_.open(path, std::ios::trunc);
    if (!file_) throw IoError("cannot write trace " + path);
  }
  void attach(codec::Options& opts) {
    if (!file_.is_open()) return;
    opts.on_step = [this](const codec::StepRecord& r) { file_ << codec::to_json_line(r, bits_) << '\n'; };
  }

 private:
  std::ofstream file_;
  bool bits_;
};

void add_provider(CLI::App* cmd, Config& c) {
  auto* model = cmd->add_option("--model", c.provider.model, "n-gram model file")->check(CLI::ExistingFile);
  auto* bridge = cmd->add_option("--bridge", c.provider.bridge,
                                 std::string("bridge endpoint: host:port, tcp://host:port or stdio:<command> "
                                             "(default $") + kBridgeEnv + ")");
  model->excludes(bridge);
  cmd->add_option("--top-n", c.provider.top_n, "entries requested per distribution")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_format(CLI::App* cmd, Config& c) {
  cmd->add_option("--format", c.format, "report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
}

int cmd_train(const Config& c, std::ostream& out, Log& log) {
  auto m = NgramModel::train_file(c.corpus, c.order, c.smoothing);
  m->save(c.out_path);
  const auto& d = m->descriptor();
  if (auto* s = log.info()) *s << "trained order-" << m->order() << " model, |V| = " << d.vocab_size << '\n';
  if (!c.key_out.empty()) {
    StegoKey key;
    key.prefix = c.prefix;
    key.epsilon = c.epsilon;
    key.model_id = d.model_id;
    key.max_pool = c.max_pool;
    if (c.max_bits) key.max_bits_per_step = c.max_bits;
    key.header_bits = c.header_bits;
    key.delta_double_norm = c.delta_double_norm;
    key.validate();
    save_key(key, c.key_out);
  }
  out << d.model_id << '\n';
  return kOk;
}

int cmd_embed(const Config& c, std::istream& in, std::ostream& out, Log& log) {
  const auto key = load_key(c.key_path);
  const std::string secret = read_input(c.in_path, in);
  const auto lm = open_provider(c.provider, log);
  codec::Options opts;
  opts.policy = parse_policy(c.policy);
  TraceFile trace(c.trace_path, c.entropy_bits);
  trace.attach(opts);
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(secret.data());
  const auto st = codec::embed_message(key, std::span(bytes, secret.size()), *lm, opts);
  write_output(c.out_path, st.rendered + "\n", out);
  if (auto* s = log.info()) {
    *s << "embedded " << secret.size() << " bytes (" << st.embedded_bits << " framed bits) in "
       << st.token_ids.size() << " tokens, "
       << static_cast<double>(st.embedded_bits) / static_cast<double>(st.embedding_steps) << " bits/token\n";
  }
  return kOk;
}

int cmd_extract(const Config& c, std::istream& in, std::ostream& out, Log& log) {
  const auto key = load_key(c.key_path);
  std::string text = read_input(c.in_path, in);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  const auto lm = open_provider(c.provider, log);
  codec::check_model(key, *lm);
  codec::Options opts;
  opts.policy = parse_policy(c.policy);
  TraceFile trace(c.trace_path, c.entropy_bits);
  trace.attach(opts);
  const auto tokens = lm->tokenize(text);
  const auto result = codec::extract_tokens(key, tokens, *lm, opts);
  const std::string payload(result.payload.begin(), result.payload.end());
  write_output(c.out_path, payload, out);
  if (auto* s = log.info()) *s << "recovered " << payload.size() << " bytes from " << tokens.size() << " tokens\n";
  return kOk;
}

int cmd_sweep(const Config& c, std::ostream& out, Log& log) {
  std::optional<StegoKey> key;
  if (!c.key_path.empty()) key = load_key(c.key_path);
  std::vector<std::string> prefixes = c.prefixes;
  if (prefixes.empty() && key) prefixes.push_back(key->prefix);
  if (prefixes.empty()) throw InvalidArgument("sweep: pass --prefix or --key");

  metrics::SweepConfig cfg;
  cfg.samples_per_point = c.samples;
  cfg.steps_per_sample = c.steps;
  cfg.max_pool = key ? key->max_pool : c.max_pool;
  cfg.scale = (c.delta_double_norm || (key && key->delta_double_norm)) ? entropy::DeltaScale::double_norm
                                                                       : entropy::DeltaScale::single;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  const auto lm = open_provider(c.provider, log);
  if (key) codec::check_model(*key, *lm);
  const auto r = metrics::threshold_sweep(*lm, prefixes, c.epsilons, cfg);
  write_output(c.out_path, c.format == "json" ? report::to_json(r) : report::to_csv(r), out);
  return kOk;
}

std::vector<std::vector<std::uint8_t>> payloads_for(const Config& c) {
  return metrics::random_payloads(c.payloads, c.min_bytes, c.max_bytes, c.seed);
}

int cmd_eval(const Config& c, std::ostream& out, Log& log) {
  const auto key = load_key(c.key_path);
  const auto lm = open_provider(c.provider, log);
  metrics::EvalConfig cfg;
  cfg.ablation = !c.no_ablation;
  const auto r = metrics::eval_table(*lm, key, payloads_for(c), c.bpw, cfg);
  if (auto* s = log.info()) {
    for (const auto& row : r.rows) {
      if (row.failures) {
        *s << metrics::to_string(row.variant) << " bpw=" << row.bpw << ": " << row.failures
           << " payloads hit the capacity limit and were skipped\n";
      }
    }
  }
  write_output(c.out_path, c.format == "json" ? report::to_json(r) : report::to_csv(r), out);
  return kOk;
}

int cmd_export(const Config& c, std::ostream& out, Log& log) {
  const auto key = load_key(c.key_path);
  const auto lm = open_provider(c.provider, log);
  const auto corpus = metrics::export_corpus(*lm, key, payloads_for(c), c.seed);
  if (auto* s = log.info()) *s << "exported " << corpus.size() << " texts\n";
  write_output(c.out_path, report::to_csv(corpus), out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Config c;
  Log log(err, c.log_level);

  CLI::App app{"Adaptive-pool linguistic steganography over n-gram or bridged language models", "adlm"};
  app.set_config("--config", "", "TOML/INI file of flag defaults; command-line flags win");
  app.add_option("--log-level", c.log_level, "diagnostics on stderr")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, LogLevel>{{"quiet", LogLevel::quiet}, {"info", LogLevel::info}, {"debug", LogLevel::debug}},
          CLI::ignore_case));
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train-lm", "train an n-gram model on a one-sentence-per-line corpus");
  train->add_option("--corpus", c.corpus, "training text")->required()->check(CLI::ExistingFile);
  train->add_option("--out", c.out_path, "model file to write")->required();
  train->add_option("--order", c.order, "n-gram order")->capture_default_str()->check(CLI::Range(1, 16));
  train->add_option("--k", c.smoothing, "add-k smoothing")->capture_default_str()->check(CLI::PositiveNumber);
  auto* key_out = train->add_option("--key-out", c.key_out, "also write a key for the new model");
  train->add_option("--prefix", c.prefix, "key prefix")->needs(key_out);
  train->add_option("--epsilon", c.epsilon, "key truncation threshold")->capture_default_str()->needs(key_out);
  train->add_option("--max-pool", c.max_pool, "key pool cap")->capture_default_str()->needs(key_out);
  train->add_option("--bpw", c.max_bits, "key cap on bits per token (0 = none)")->needs(key_out);
  train->add_option("--header-bits", c.header_bits, "key length-header width")
      ->capture_default_str()
      ->check(CLI::IsMember({16u, 32u}))
      ->needs(key_out);
  train->add_flag("--delta-double-norm", c.delta_double_norm, "key divides confidence gains by ln|V| twice")
      ->needs(key_out);

  auto* embed = app.add_subcommand("embed", "hide a secret read from --in (or stdin) in generated text");
  auto* extract = app.add_subcommand("extract", "recover the secret from stego text");
  for (auto* cmd : {embed, extract}) {
    cmd->add_option("--key", c.key_path, "key file")->required()->check(CLI::ExistingFile);
    add_provider(cmd, c);
    cmd->add_option("--in", c.in_path, "input file ('-' or absent: stdin)");
    cmd->add_option("--out", c.out_path, "output file (absent: stdout)");
    cmd->add_option("--trace", c.trace_path, "write per-step JSON lines to this file");
    cmd->add_flag("--bits", c.entropy_bits, "trace entropies in bits instead of nats");
    cmd->add_option("--policy", c.policy, "candidate pool policy")
        ->capture_default_str()
        ->check(CLI::IsMember({"adaptive", "fixed"}));
  }

  auto* sweep = app.add_subcommand("sweep", "mean candidate-pool size per threshold");
  add_provider(sweep, c);
  sweep->add_option("--key", c.key_path, "take prefix, pool cap and scale from a key")->check(CLI::ExistingFile);
  sweep->add_option("--epsilons", c.epsilons, "strictly increasing thresholds")->delimiter(',')->capture_default_str();
  sweep->add_option("--prefix", c.prefixes, "generation prefix (repeatable)");
  sweep->add_option("--samples", c.samples, "texts generated")->capture_default_str();
  sweep->add_option("--steps", c.steps, "tokens per text")->capture_default_str();
  sweep->add_option("--max-pool", c.max_pool, "pool cap without a key")->capture_default_str();
  sweep->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  sweep->add_option("--threads", c.threads, "worker threads; output does not depend on it")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--delta-double-norm", c.delta_double_norm, "divide confidence gains by ln|V| twice");
  sweep->add_option("--out", c.out_path, "output file (absent: stdout)");
  add_format(sweep, c);

  auto* eval = app.add_subcommand("eval", "PPL and Distinct-2 per bits-per-word cap, adaptive vs fixed pool");
  auto* exportc = app.add_subcommand("export-corpus", "labelled cover/stego CSV for external steganalysis");
  for (auto* cmd : {eval, exportc}) {
    cmd->add_option("--key", c.key_path, "key template")->required()->check(CLI::ExistingFile);
    add_provider(cmd, c);
    cmd->add_option("--payloads", c.payloads, "random payloads")->capture_default_str();
    cmd->add_option("--min-bytes", c.min_bytes, "shortest payload")->capture_default_str();
    cmd->add_option("--max-bytes", c.max_bytes, "longest payload")->capture_default_str();
    cmd->add_option("--seed", c.seed, "payload and cover seed")->capture_default_str();
    cmd->add_option("--out", c.out_path, "output file (absent: stdout)");
  }
  eval->add_option("--bpw", c.bpw, "bits-per-word caps")->delimiter(',')->capture_default_str();
  eval->add_flag("--no-ablation", c.no_ablation, "skip the fixed-pool rows");
  add_format(eval, c);

  // Global options may also follow the command name.
  for (auto* cmd : {train, embed, extract, sweep, eval, exportc}) cmd->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(c, out, log);
    if (embed->parsed()) return cmd_embed(c, in, out, log);
    if (extract->parsed()) return cmd_extract(c, in, out, log);
    if (sweep->parsed()) return cmd_sweep(c, out, log);
    if (eval->parsed()) return cmd_eval(c, out, log);
    if (exportc->parsed()) return cmd_export(c, out, log);
  } catch (const DesyncError& e) {
    err << "adlm: " << e.what() << '\n';
    return kDesync;
  } catch (const ModelMismatch& e) {
    err << "adlm: " << e.what() << '\n';
    return kProvider;
  } catch (const TransportError& e) {
    err << "adlm: " << e.what() << '\n';
    return kProvider;
  } catch (const std::exception& e) {
    err << "adlm: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace adlm::cli
