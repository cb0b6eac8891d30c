#include "coditkit/tokens.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "coditkit/error.hpp"

namespace coditkit {

namespace markers {

bool is_marker(std::string_view token) {
  return std::find(kAll.begin(), kAll.end(), token) != kAll.end();
}

bool is_operation_marker(std::string_view token) {
  return token != kMask && token != kSeparator && is_marker(token);
}

}  // namespace markers

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool contains_space(std::string_view s) { return std::any_of(s.begin(), s.end(), is_space); }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation or invalid byte: keep it as its own symbol
}

std::vector<std::string> split_codepoints(std::string_view word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    std::size_t len = std::min(utf8_length(static_cast<unsigned char>(word[i])), word.size() - i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::string pair_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back(' ');
  key.append(right);
  return key;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

std::string sanitize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    if (text[i] == '<' || text[i] == '[') {
      for (std::string_view m : markers::kAll) {
        if (text.substr(i, m.size()) == m) {
          out.push_back('\\');
          out.append(m.substr(0, m.size() - 1));
          out.push_back('\\');
          out.push_back(m.back());
          i += m.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

Tokenizer::Tokenizer()
    : Tokenizer(TokenizerKind::Whitespace,
                std::vector<std::string>(markers::kAll.begin(), markers::kAll.end()), {}) {}

Tokenizer::Tokenizer(TokenizerKind kind, std::vector<std::string> vocabulary,
                     std::vector<std::pair<std::string, std::string>> merges)
    : kind_(kind), id_to_token_(std::move(vocabulary)), merges_(std::move(merges)) {
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    const std::string& tok = id_to_token_[i];
    if (tok.empty()) throw ParseError("empty vocabulary entry at id " + std::to_string(i));
    if (!token_to_id_.emplace(tok, static_cast<std::uint32_t>(i)).second) {
      throw ParseError("duplicate vocabulary entry '" + tok + "'");
    }
  }
  for (std::string_view m : markers::kAll) {
    if (!token_to_id_.count(std::string(m))) throw MissingMarker(std::string(m));
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_rank_.emplace(pair_key(merges_[r].first, merges_[r].second), r);
  }
}

Tokenizer Tokenizer::whitespace(std::vector<std::string> vocabulary) {
  return Tokenizer(TokenizerKind::Whitespace, std::move(vocabulary), {});
}

Tokenizer Tokenizer::bpe(std::vector<std::string> vocabulary,
                         std::vector<std::pair<std::string, std::string>> merges) {
  return Tokenizer(TokenizerKind::BytePairEncoding, std::move(vocabulary), std::move(merges));
}

std::optional<std::uint32_t> Tokenizer::token_id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

void Tokenizer::encode_word(std::string_view word, bool word_initial_space,
                            TokenSequence& out) const {
  std::vector<std::string> symbols;
  if (word_initial_space) symbols.emplace_back(kSpaceSymbol);
  for (auto& cp : split_codepoints(word)) symbols.push_back(std::move(cp));

  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;

    const auto& [left, right] = merges_[best_rank];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        merged.push_back(left + right);
        i += 2;
      } else {
        merged.push_back(std::move(symbols[i]));
        ++i;
      }
    }
    symbols = std::move(merged);
  }
  for (auto& s : symbols) out.push_back(std::move(s));
}

TokenSequence Tokenizer::tokenize(std::string_view text) const {
  TokenSequence out;
  auto words = split_whitespace(text);
  if (kind_ == TokenizerKind::Whitespace) {
    out.assign(words.begin(), words.end());
    return out;
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (markers::is_marker(words[i])) {
      out.emplace_back(words[i]);
    } else {
      encode_word(words[i], i > 0, out);
    }
  }
  return out;
}

std::string Tokenizer::detokenize(const TokenSequence& seq) const {
  std::string text;
  if (kind_ == TokenizerKind::Whitespace) {
    for (const auto& tok : seq) {
      if (tok.empty() || contains_space(tok)) throw UnknownToken(tok);
      if (!text.empty()) text.push_back(' ');
      text += tok;
    }
    return text;
  }

  for (const auto& tok : seq) {
    if (tok.empty() || contains_space(tok)) throw UnknownToken(tok);
    if (markers::is_marker(tok)) {
      if (!text.empty()) text.push_back(' ');
      text += tok;
      continue;
    }
    if (!token_to_id_.count(tok)) {
      std::string_view body = tok;
      if (body.substr(0, kSpaceSymbol.size()) == kSpaceSymbol) body.remove_prefix(kSpaceSymbol.size());
      if (split_codepoints(body).size() > 1) throw UnknownToken(tok);
    }
    std::string_view rest = tok;
    for (std::size_t pos; (pos = rest.find(kSpaceSymbol)) != std::string_view::npos;) {
      text.append(rest.substr(0, pos));
      text.push_back(' ');
      rest.remove_prefix(pos + kSpaceSymbol.size());
    }
    text.append(rest);
  }
  return text;
}

Tokenizer load_tokenizer(const std::filesystem::path& vocab_file,
                         const std::optional<std::filesystem::path>& merges_file) {
  auto vocab = read_lines(vocab_file);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i].empty()) {
      throw ParseError(vocab_file.string() + ":" + std::to_string(i + 1) + ": empty token");
    }
  }
  if (!merges_file) return Tokenizer::whitespace(std::move(vocab));

  std::vector<std::pair<std::string, std::string>> merges;
  auto lines = read_lines(*merges_file);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (i == 0 && line.rfind("#version", 0) == 0) continue;
    auto fields = split_whitespace(line);
    if (fields.size() != 2) {
      throw ParseError(merges_file->string() + ":" + std::to_string(i + 1) +
                       ": expected 'left right'");
    }
    merges.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }
  return Tokenizer::bpe(std::move(vocab), std::move(merges));
}

}  // namespace coditkit
