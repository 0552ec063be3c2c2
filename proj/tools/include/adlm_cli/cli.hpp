// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adlm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      ///< bad flags, unreadable files, invalid key, capacity exhausted
  kDesync = 2,     ///< extraction saw a token the generator could not have produced
  kProvider = 3,   ///< bridge transport failure or model mismatch
};

/// Runs one command. `args` excludes the program name. Data goes to `out`
/// (unless --out is given), diagnostics to `err`; `in` backs "-" / absent --in.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace adlm::cli
