#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "coditkit/edit_plan.hpp"
#include "coditkit/tokens.hpp"

namespace coditkit::testing {

inline TokenSequence toks(std::string_view text) {
  TokenSequence out;
  for (auto w : split_whitespace(text)) out.emplace_back(w);
  return out;
}

inline TokenSequence random_sequence(std::mt19937_64& rng, std::size_t max_len,
                                     std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet - 1);
  TokenSequence seq(len_dist(rng));
  for (auto& t : seq) t = "t" + std::to_string(sym(rng));
  return seq;
}

// Textbook Wagner-Fischer distance over prefixes; deliberately a different
// recurrence direction and storage than the library's suffix table.
inline std::size_t levenshtein_oracle(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

// Random well-formed plan (Insert/Delete/Replace, optionally Keep) over a
// small alphabet that includes [MASK].
inline EditPlan random_plan(std::mt19937_64& rng, bool with_keep) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "[MASK]", "x", "y", "ret", ";"};
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_int_distribution<int> kind(0, with_keep ? 3 : 2);
  std::uniform_int_distribution<int> span_len(1, 4);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
  auto span = [&] {
    TokenSequence s(static_cast<std::size_t>(span_len(rng)));
    for (auto& t : s) t = alphabet[sym(rng)];
    return s;
  };
  EditPlan plan;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    switch (kind(rng)) {
      case 0:
        plan.operations.push_back(EditOperation::insert(span()));
        break;
      case 1:
        plan.operations.push_back(EditOperation::erase(span()));
        break;
      case 2:
        plan.operations.push_back(EditOperation::replace(span(), span()));
        break;
      default:
        plan.operations.push_back(EditOperation::keep(span()));
        break;
    }
  }
  return plan;
}

}  // namespace coditkit::testing
