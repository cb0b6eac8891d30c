#include "coditkit/task_formats.hpp"

#include <algorithm>

#include "coditkit/edit_plan.hpp"
#include "coditkit/error.hpp"

namespace coditkit {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::CommentUpdate:
      return "comment-update";
    case Task::BugFix:
      return "bugfix";
    case Task::CodeReview:
      return "code-review";
  }
  return "unknown";
}

std::optional<Task> task_from_string(std::string_view name) {
  for (Task t : {Task::CommentUpdate, Task::BugFix, Task::CodeReview}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

void require_non_empty(const TokenSequence& seq, const char* field) {
  if (seq.empty()) throw PreconditionError(std::string(field) + " must not be empty");
}

void append(TokenSequence& out, const TokenSequence& seq) {
  out.insert(out.end(), seq.begin(), seq.end());
}

void append_separator(TokenSequence& out) { out.emplace_back(markers::kSeparator); }

}  // namespace

TokenSequence build_comment_update_input(const CommentUpdateExample& ex) {
  require_non_empty(ex.old_comment, "old_comment");
  require_non_empty(ex.old_code, "old_code");
  require_non_empty(ex.new_code, "new_code");
  TokenSequence out = ex.old_comment;
  append_separator(out);
  append(out, to_keep_annotated(ex.old_code, ex.new_code));
  return out;
}

TokenSequence build_bugfix_input(const BugFixExample& ex) {
  require_non_empty(ex.buggy, "buggy");
  TokenSequence out = ex.buggy;
  append_separator(out);
  append(out, ex.guidance);
  append_separator(out);
  append(out, ex.context);
  return out;
}

TokenSequence build_code_review_input(const CodeReviewExample& ex) {
  require_non_empty(ex.code_before, "code_before");
  require_non_empty(ex.review_comment, "review_comment");
  TokenSequence out = ex.code_before;
  append_separator(out);
  append(out, ex.review_comment);
  return out;
}

std::size_t separator_count(Task task) { return task == Task::BugFix ? 2 : 1; }

ExtractedTarget extract_target(const TokenSequence& model_output) {
  auto sep = std::find(model_output.begin(), model_output.end(), markers::kSeparator);
  if (sep == model_output.end()) return {model_output, true};
  return {TokenSequence(sep + 1, model_output.end()), false};
}

double copy_rate(const std::vector<TokenSequence>& predictions,
                 const std::vector<TokenSequence>& editable_inputs) {
  if (predictions.size() != editable_inputs.size()) {
    throw LengthMismatch(predictions.size(), editable_inputs.size());
  }
  if (predictions.empty()) throw PreconditionError("copy rate of an empty corpus");
  std::size_t copies = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == editable_inputs[i]) ++copies;
  }
  return static_cast<double>(copies) / static_cast<double>(predictions.size());
}

}  // namespace coditkit
