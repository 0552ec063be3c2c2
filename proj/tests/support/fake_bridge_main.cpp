// SPDX-License-Identifier: Apache-2.0
// Stdio bridge over an n-gram model, for transport tests.
//
//   adlm_fake_bridge --model m.bin [--drift-after N]
//   adlm_fake_bridge --sentences N --seed S

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "bridge_server.hpp"
#include "corpus.hpp"

int main(int argc, char** argv) {
  std::string model_path;
  std::size_t sentences = 2000, drift = 0;
  std::uint64_t seed = 7;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::string value = argv[i + 1];
    if (flag == "--model") model_path = value;
    else if (flag == "--sentences") sentences = std::stoul(value);
    else if (flag == "--seed") seed = std::stoull(value);
    else if (flag == "--drift-after") drift = std::stoul(value);
    else {
      std::cerr << "unknown flag " << flag << '\n';
      return 2;
    }
  }
  try {
    std::shared_ptr<const adlm::NgramModel> model;
    if (!model_path.empty()) {
      model = adlm::NgramModel::load(model_path);
    } else {
      std::istringstream corpus(adlm::testing::synthetic_corpus(sentences, seed));
      model = adlm::NgramModel::train(corpus);
    }
    adlm::testing::BridgeServer server(model);
    server.drift_after(drift);
    adlm::testing::serve(server, std::cin, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "fake bridge: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
