#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "coditkit/tokens.hpp"

namespace coditkit {

enum class Task { CommentUpdate, BugFix, CodeReview };

std::string_view to_string(Task task);
std::optional<Task> task_from_string(std::string_view name);

struct CommentUpdateExample {
  TokenSequence old_comment;
  TokenSequence old_code;
  TokenSequence new_code;
  TokenSequence new_comment;
};

struct BugFixExample {
  TokenSequence buggy;
  TokenSequence guidance;
  TokenSequence context;
  TokenSequence fixed;
};

struct CodeReviewExample {
  TokenSequence code_before;
  TokenSequence review_comment;
  TokenSequence code_after;
};

// old_comment <s> keep-annotated(old_code -> new_code)
TokenSequence build_comment_update_input(const CommentUpdateExample& ex);

// buggy <s> guidance <s> context; empty fields leave an empty segment.
TokenSequence build_bugfix_input(const BugFixExample& ex);

// code_before <s> review_comment
TokenSequence build_code_review_input(const CodeReviewExample& ex);

// Number of separators each task's model input carries.
std::size_t separator_count(Task task);

struct ExtractedTarget {
  TokenSequence target;
  bool missing_separator = false;
};

// Tokens strictly after the first <s>; the whole output when there is none.
ExtractedTarget extract_target(const TokenSequence& model_output);

// Fraction of predictions identical to their editable input.
double copy_rate(const std::vector<TokenSequence>& predictions,
                 const std::vector<TokenSequence>& editable_inputs);

}  // namespace coditkit
