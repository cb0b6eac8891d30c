#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace coditkit {

// Ordered list of subword tokens. Every token is non-empty; equality is
// positional.
using TokenSequence = std::vector<std::string>;

namespace markers {

inline constexpr std::string_view kMask = "[MASK]";
inline constexpr std::string_view kSeparator = "<s>";
inline constexpr std::string_view kInsert = "<Insert>";
inline constexpr std::string_view kInsertEnd = "<InsertEnd>";
inline constexpr std::string_view kDelete = "<Delete>";
inline constexpr std::string_view kDeleteEnd = "<DeleteEnd>";
inline constexpr std::string_view kReplaceOld = "<ReplaceOld>";
inline constexpr std::string_view kReplaceNew = "<ReplaceNew>";
inline constexpr std::string_view kReplaceEnd = "<ReplaceEnd>";
inline constexpr std::string_view kKeep = "<Keep>";
inline constexpr std::string_view kKeepEnd = "<KeepEnd>";

inline constexpr std::array<std::string_view, 11> kAll = {
    kMask,      kSeparator,  kInsert,      kInsertEnd, kDelete, kDeleteEnd,
    kReplaceOld, kReplaceNew, kReplaceEnd, kKeep,      kKeepEnd};

bool is_marker(std::string_view token);

// True for the nine edit-operation markers (excludes [MASK] and <s>).
bool is_operation_marker(std::string_view token);

}  // namespace markers

// Replaces literal marker spellings in raw corpus text with an escaped form
// ("<Insert>" -> "\<Insert\>") so they can never be read as plan markers.
std::string sanitize(std::string_view text);

// Splits on ASCII whitespace.
std::vector<std::string_view> split_whitespace(std::string_view text);

enum class TokenizerKind { Whitespace, BytePairEncoding };

class Tokenizer {
 public:
  // Whitespace tokenizer whose vocabulary holds only the reserved markers.
  Tokenizer();

  static Tokenizer whitespace(std::vector<std::string> vocabulary);
  static Tokenizer bpe(std::vector<std::string> vocabulary,
                       std::vector<std::pair<std::string, std::string>> merges);

  TokenizerKind kind() const noexcept { return kind_; }
  std::size_t vocabulary_size() const noexcept { return id_to_token_.size(); }
  std::optional<std::uint32_t> token_id(std::string_view token) const;
  const std::vector<std::pair<std::string, std::string>>& merges() const noexcept {
    return merges_;
  }

  TokenSequence tokenize(std::string_view text) const;

  // Throws UnknownToken when a token cannot be produced by this tokenizer.
  std::string detokenize(const TokenSequence& seq) const;

 private:
  Tokenizer(TokenizerKind kind, std::vector<std::string> vocabulary,
            std::vector<std::pair<std::string, std::string>> merges);

  void encode_word(std::string_view word, bool word_initial_space, TokenSequence& out) const;

  TokenizerKind kind_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::uint32_t> token_to_id_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, std::size_t> merge_rank_;
};

// The byte-pair-encoding tokenizer marks a preceding space with this symbol
// (U+0120), following the GPT-2/RoBERTa convention.
inline constexpr std::string_view kSpaceSymbol = "\xC4\xA0";

// Vocabulary: one token per line, line number is the id. Merges: one
// "left right" pair per line, priority by line order. Without a merges file
// the result is a whitespace tokenizer.
Tokenizer load_tokenizer(const std::filesystem::path& vocab_file,
                         const std::optional<std::filesystem::path>& merges_file = std::nullopt);

}  // namespace coditkit
