// SPDX-License-Identifier: Apache-2.0
#include "adlm/provider.hpp"

namespace adlm {

std::string_view to_string(ProviderKind k) noexcept {
  switch (k) {
    case ProviderKind::builtin_ngram: return "builtin_ngram";
    case ProviderKind::bridge: return "bridge";
  }
  return "unknown";
}

bool LanguageModel::ends_sentence(TokenId token) const {
  if (eos_token() == token) return true;
  const TokenId one[] = {token};
  const std::string text = detokenize(one);
  auto last = text.find_last_not_of(" \t\r\n");
  if (last == std::string::npos) return false;
  const char c = text[last];
  return c == '.' || c == '!' || c == '?';
}

}  // namespace adlm
