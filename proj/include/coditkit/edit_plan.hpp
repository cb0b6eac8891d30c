#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "coditkit/tokens.hpp"

namespace coditkit {

enum class OpKind { Insert, Delete, Replace, Keep };

std::string_view to_string(OpKind kind);
std::optional<OpKind> op_kind_from_string(std::string_view name);

struct EditOperation {
  OpKind kind = OpKind::Insert;
  TokenSequence old_span;
  TokenSequence new_span;
  // Index into the source where old_span starts, or where an insertion anchors.
  std::optional<std::size_t> source_position;

  static EditOperation insert(TokenSequence new_span, std::optional<std::size_t> pos = {});
  static EditOperation erase(TokenSequence old_span, std::optional<std::size_t> pos = {});
  static EditOperation replace(TokenSequence old_span, TokenSequence new_span,
                               std::optional<std::size_t> pos = {});
  static EditOperation keep(TokenSequence span, std::optional<std::size_t> pos = {});

  // Checks the per-kind span shape (Insert: new only, Delete: old only, ...).
  bool well_formed() const;

  // Number of edited tokens: |new| for Insert, |old| for Delete,
  // max(|old|, |new|) for Replace, 0 for Keep.
  std::size_t edited_tokens() const;

  friend bool operator==(const EditOperation&, const EditOperation&) = default;
};

struct EditPlan {
  std::vector<EditOperation> operations;
  // Every operation carries a source position. Plans from compute_edit_script
  // are positional; plans from parse_plan never are.
  bool positional = false;

  bool empty() const noexcept { return operations.empty(); }
  std::size_t size() const noexcept { return operations.size(); }
  std::size_t edited_tokens() const;

  // Copy with every source position dropped.
  EditPlan without_positions() const;

  friend bool operator==(const EditPlan&, const EditPlan&) = default;
};

enum class DiffBackend {
  // Longest contiguous matching block, recursively on both sides (the
  // SequenceMatcher opcode semantics, no junk heuristics).
  ContiguousLongestMatch,
  // Token-level Levenshtein optimum with leftmost alignment.
  MinimalLevenshtein,
};

enum class ApplyPolicy { Positional, LeftmostCursor, Strict };

std::string_view to_string(DiffBackend backend);
std::string_view to_string(ApplyPolicy policy);
std::optional<DiffBackend> diff_backend_from_string(std::string_view name);
std::optional<ApplyPolicy> apply_policy_from_string(std::string_view name);

// Positional plan with maximal (coalesced) spans, never Keep operations.
EditPlan compute_edit_script(const TokenSequence& source, const TokenSequence& target,
                             DiffBackend backend = DiffBackend::ContiguousLongestMatch);

// Marker grammar; positions are not serialized.
TokenSequence serialize_plan(const EditPlan& plan);

// Strict parser for the marker grammar (Keep included). Throws MalformedPlan.
EditPlan parse_plan(const TokenSequence& tokens);

TokenSequence apply_plan(const EditPlan& plan, const TokenSequence& source,
                         ApplyPolicy policy = ApplyPolicy::LeftmostCursor);

struct ConsistencyReport {
  bool consistent = false;
  std::optional<TokenSequence> applied_result;
  std::optional<std::size_t> divergence_index;
};

// A target is consistent with a plan when the operations, taken in order and
// each matched at or after the previous one, can be placed in the source so
// that the result is the target. The leftmost such placement is reported.
// When no placement exists the report carries the leftmost-cursor result
// (absent if that application fails) and its first divergence from target.
ConsistencyReport check_consistency(const EditPlan& plan, const TokenSequence& source,
                                    const TokenSequence& target);

// Same, for a serialized plan; a plan that fails to parse is inconsistent.
ConsistencyReport check_consistency(const TokenSequence& serialized_plan,
                                    const TokenSequence& source, const TokenSequence& target);

// Full alignment of source to target with Keep operations for unchanged spans.
TokenSequence to_keep_annotated(const TokenSequence& source, const TokenSequence& target,
                                DiffBackend backend = DiffBackend::ContiguousLongestMatch);

}  // namespace coditkit
