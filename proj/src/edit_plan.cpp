#include "coditkit/edit_plan.hpp"

#include <algorithm>
#include <functional>

#include "coditkit/error.hpp"
#include "diff.hpp"

namespace coditkit {

const char* to_string(MalformedReason reason) {
  switch (reason) {
    case MalformedReason::Unterminated:
      return "unterminated";
    case MalformedReason::NestedMarker:
      return "nested-marker";
    case MalformedReason::EmptySpan:
      return "empty-span";
    case MalformedReason::StrayToken:
      return "stray-token";
  }
  return "unknown";
}

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Insert:
      return "insert";
    case OpKind::Delete:
      return "delete";
    case OpKind::Replace:
      return "replace";
    case OpKind::Keep:
      return "keep";
  }
  return "unknown";
}

std::optional<OpKind> op_kind_from_string(std::string_view name) {
  for (OpKind k : {OpKind::Insert, OpKind::Delete, OpKind::Replace, OpKind::Keep}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(DiffBackend backend) {
  return backend == DiffBackend::ContiguousLongestMatch ? "contiguous-longest-match"
                                                        : "minimal-levenshtein";
}

std::string_view to_string(ApplyPolicy policy) {
  switch (policy) {
    case ApplyPolicy::Positional:
      return "positional";
    case ApplyPolicy::LeftmostCursor:
      return "leftmost-cursor";
    case ApplyPolicy::Strict:
      return "strict";
  }
  return "unknown";
}

std::optional<DiffBackend> diff_backend_from_string(std::string_view name) {
  for (DiffBackend b : {DiffBackend::ContiguousLongestMatch, DiffBackend::MinimalLevenshtein}) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

std::optional<ApplyPolicy> apply_policy_from_string(std::string_view name) {
  for (ApplyPolicy p : {ApplyPolicy::Positional, ApplyPolicy::LeftmostCursor, ApplyPolicy::Strict}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

EditOperation EditOperation::insert(TokenSequence new_span, std::optional<std::size_t> pos) {
  return {OpKind::Insert, {}, std::move(new_span), pos};
}

EditOperation EditOperation::erase(TokenSequence old_span, std::optional<std::size_t> pos) {
  return {OpKind::Delete, std::move(old_span), {}, pos};
}

EditOperation EditOperation::replace(TokenSequence old_span, TokenSequence new_span,
                                     std::optional<std::size_t> pos) {
  return {OpKind::Replace, std::move(old_span), std::move(new_span), pos};
}

EditOperation EditOperation::keep(TokenSequence span, std::optional<std::size_t> pos) {
  TokenSequence copy = span;
  return {OpKind::Keep, std::move(copy), std::move(span), pos};
}

bool EditOperation::well_formed() const {
  switch (kind) {
    case OpKind::Insert:
      return old_span.empty() && !new_span.empty();
    case OpKind::Delete:
      return !old_span.empty() && new_span.empty();
    case OpKind::Replace:
      return !old_span.empty() && !new_span.empty();
    case OpKind::Keep:
      return !old_span.empty() && old_span == new_span;
  }
  return false;
}

std::size_t EditOperation::edited_tokens() const {
  switch (kind) {
    case OpKind::Insert:
      return new_span.size();
    case OpKind::Delete:
      return old_span.size();
    case OpKind::Replace:
      return std::max(old_span.size(), new_span.size());
    case OpKind::Keep:
      return 0;
  }
  return 0;
}

std::size_t EditPlan::edited_tokens() const {
  std::size_t total = 0;
  for (const auto& op : operations) total += op.edited_tokens();
  return total;
}

EditPlan EditPlan::without_positions() const {
  EditPlan out{operations, false};
  for (auto& op : out.operations) op.source_position.reset();
  return out;
}

namespace {

TokenSequence slice(const TokenSequence& seq, std::size_t from, std::size_t to) {
  return TokenSequence(seq.begin() + static_cast<std::ptrdiff_t>(from),
                       seq.begin() + static_cast<std::ptrdiff_t>(to));
}

EditOperation op_from_opcode(const detail::Opcode& oc, const TokenSequence& a,
                             const TokenSequence& b) {
  return {oc.kind, slice(a, oc.i1, oc.i2),
          oc.kind == OpKind::Delete ? TokenSequence{} : slice(b, oc.j1, oc.j2), oc.i1};
}

void append_marker(TokenSequence& out, std::string_view marker) { out.emplace_back(marker); }

void append_span(TokenSequence& out, const TokenSequence& span) {
  out.insert(out.end(), span.begin(), span.end());
}

}  // namespace

EditPlan compute_edit_script(const TokenSequence& source, const TokenSequence& target,
                             DiffBackend backend) {
  EditPlan plan;
  plan.positional = true;
  for (const auto& oc : detail::diff_opcodes(source, target, backend)) {
    if (oc.kind == OpKind::Keep) continue;
    plan.operations.push_back(op_from_opcode(oc, source, target));
  }
  return plan;
}

TokenSequence serialize_plan(const EditPlan& plan) {
  using namespace markers;
  TokenSequence out;
  for (const auto& op : plan.operations) {
    switch (op.kind) {
      case OpKind::Insert:
        append_marker(out, kInsert);
        append_span(out, op.new_span);
        append_marker(out, kInsertEnd);
        break;
      case OpKind::Delete:
        append_marker(out, kDelete);
        append_span(out, op.old_span);
        append_marker(out, kDeleteEnd);
        break;
      case OpKind::Replace:
        append_marker(out, kReplaceOld);
        append_span(out, op.old_span);
        append_marker(out, kReplaceNew);
        append_span(out, op.new_span);
        append_marker(out, kReplaceEnd);
        break;
      case OpKind::Keep:
        append_marker(out, kKeep);
        append_span(out, op.old_span);
        append_marker(out, kKeepEnd);
        break;
    }
  }
  return out;
}

EditPlan parse_plan(const TokenSequence& tokens) {
  using namespace markers;
  enum class State { Outside, Insert, Delete, ReplaceOld, ReplaceNew, Keep };

  EditPlan plan;
  State state = State::Outside;
  EditOperation current;

  auto close = [&](std::size_t pos, const TokenSequence& span) {
    if (span.empty()) throw MalformedPlan(pos, MalformedReason::EmptySpan);
    if (current.kind == OpKind::Keep) current.new_span = current.old_span;
    plan.operations.push_back(std::move(current));
    current = EditOperation{};
    state = State::Outside;
  };

  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::string& tok = tokens[pos];
    if (state == State::Outside) {
      if (tok == kInsert) {
        current.kind = OpKind::Insert;
        state = State::Insert;
      } else if (tok == kDelete) {
        current.kind = OpKind::Delete;
        state = State::Delete;
      } else if (tok == kReplaceOld) {
        current.kind = OpKind::Replace;
        state = State::ReplaceOld;
      } else if (tok == kKeep) {
        current.kind = OpKind::Keep;
        state = State::Keep;
      } else {
        throw MalformedPlan(pos, MalformedReason::StrayToken);
      }
      continue;
    }

    const bool is_structural = is_marker(tok) && tok != kMask;
    switch (state) {
      case State::Insert:
        if (tok == kInsertEnd) {
          close(pos, current.new_span);
          continue;
        }
        break;
      case State::Delete:
        if (tok == kDeleteEnd) {
          close(pos, current.old_span);
          continue;
        }
        break;
      case State::Keep:
        if (tok == kKeepEnd) {
          close(pos, current.old_span);
          continue;
        }
        break;
      case State::ReplaceOld:
        if (tok == kReplaceNew) {
          if (current.old_span.empty()) throw MalformedPlan(pos, MalformedReason::EmptySpan);
          state = State::ReplaceNew;
          continue;
        }
        break;
      case State::ReplaceNew:
        if (tok == kReplaceEnd) {
          close(pos, current.new_span);
          continue;
        }
        break;
      case State::Outside:
        break;
    }
    if (is_structural) throw MalformedPlan(pos, MalformedReason::NestedMarker);
    if (state == State::Insert || state == State::ReplaceNew) {
      current.new_span.push_back(tok);
    } else {
      current.old_span.push_back(tok);
    }
  }
  if (state != State::Outside) throw MalformedPlan(tokens.size(), MalformedReason::Unterminated);
  return plan;
}

namespace {

std::optional<std::size_t> find_span(const TokenSequence& source, const TokenSequence& span,
                                     std::size_t from) {
  auto it = std::search(source.begin() + static_cast<std::ptrdiff_t>(from), source.end(),
                        span.begin(), span.end());
  if (it == source.end()) return std::nullopt;
  return static_cast<std::size_t>(it - source.begin());
}

void copy_range(TokenSequence& out, const TokenSequence& source, std::size_t from, std::size_t to) {
  out.insert(out.end(), source.begin() + static_cast<std::ptrdiff_t>(from),
             source.begin() + static_cast<std::ptrdiff_t>(to));
}

TokenSequence apply_positional(const EditPlan& plan, const TokenSequence& source) {
  if (!plan.positional) {
    throw PreconditionError("positional application requires a positional plan");
  }
  TokenSequence out;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < plan.operations.size(); ++k) {
    const auto& op = plan.operations[k];
    if (!op.source_position) {
      throw PreconditionError("operation " + std::to_string(k) + " has no source position");
    }
    const std::size_t pos = *op.source_position;
    if (pos < cursor || pos + op.old_span.size() > source.size() ||
        !std::equal(op.old_span.begin(), op.old_span.end(),
                    source.begin() + static_cast<std::ptrdiff_t>(pos))) {
      throw PositionMismatch(k);
    }
    copy_range(out, source, cursor, pos);
    append_span(out, op.new_span);
    cursor = pos + op.old_span.size();
  }
  copy_range(out, source, cursor, source.size());
  return out;
}

TokenSequence apply_cursor(const EditPlan& plan, const TokenSequence& source, bool strict) {
  TokenSequence out;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < plan.operations.size(); ++k) {
    const auto& op = plan.operations[k];
    if (op.kind == OpKind::Insert) {
      if (strict && (k == 0 || plan.operations[k - 1].kind == OpKind::Insert)) {
        throw AmbiguousInsert(k);
      }
      append_span(out, op.new_span);
      continue;
    }
    auto pos = find_span(source, op.old_span, cursor);
    if (!pos) throw SpanNotFound(k);
    copy_range(out, source, cursor, *pos);
    append_span(out, op.new_span);
    cursor = *pos + op.old_span.size();
  }
  copy_range(out, source, cursor, source.size());
  return out;
}

}  // namespace

TokenSequence apply_plan(const EditPlan& plan, const TokenSequence& source, ApplyPolicy policy) {
  switch (policy) {
    case ApplyPolicy::Positional:
      return apply_positional(plan, source);
    case ApplyPolicy::LeftmostCursor:
      return apply_cursor(plan, source, false);
    case ApplyPolicy::Strict:
      return apply_cursor(plan, source, true);
  }
  return source;
}

namespace {

// Depth-first search for the leftmost in-order placement of the operations
// that turns source into target. State (op, cursor) fixes the output offset,
// so failed states are memoized on that pair.
class PlacementSearch {
 public:
  PlacementSearch(const EditPlan& plan, const TokenSequence& source, const TokenSequence& target)
      : ops_(plan.operations),
        source_(source),
        target_(target),
        failed_((ops_.size() + 1) * (source.size() + 1), false) {}

  bool run() { return solve(0, 0, 0); }

 private:
  bool matches_target(const TokenSequence& span, std::size_t at) const {
    return at + span.size() <= target_.size() &&
           std::equal(span.begin(), span.end(), target_.begin() + static_cast<std::ptrdiff_t>(at));
  }

  bool solve(std::size_t k, std::size_t cursor, std::size_t out) {
    if (k == ops_.size()) {
      return source_.size() - cursor == target_.size() - out &&
             std::equal(source_.begin() + static_cast<std::ptrdiff_t>(cursor), source_.end(),
                        target_.begin() + static_cast<std::ptrdiff_t>(out));
    }
    const std::size_t key = k * (source_.size() + 1) + cursor;
    if (failed_[key]) return false;

    const EditOperation& op = ops_[k];
    for (std::size_t pos = cursor; pos <= source_.size(); ++pos) {
      const std::size_t copied = pos - cursor;
      if (copied > 0) {
        // The untouched stretch before the edit must reproduce the target.
        if (out + copied > target_.size() || source_[pos - 1] != target_[out + copied - 1]) break;
      }
      const std::size_t at = out + copied;
      if (op.kind == OpKind::Insert) {
        if (matches_target(op.new_span, at) && solve(k + 1, pos, at + op.new_span.size())) {
          return true;
        }
        continue;
      }
      if (pos + op.old_span.size() > source_.size()) break;
      if (std::equal(op.old_span.begin(), op.old_span.end(),
                     source_.begin() + static_cast<std::ptrdiff_t>(pos)) &&
          matches_target(op.new_span, at) &&
          solve(k + 1, pos + op.old_span.size(), at + op.new_span.size())) {
        return true;
      }
    }
    failed_[key] = true;
    return false;
  }

  const std::vector<EditOperation>& ops_;
  const TokenSequence& source_;
  const TokenSequence& target_;
  std::vector<bool> failed_;
};

std::size_t first_divergence(const TokenSequence& a, const TokenSequence& b) {
  auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return static_cast<std::size_t>(ia - a.begin());
}

}  // namespace

ConsistencyReport check_consistency(const EditPlan& plan, const TokenSequence& source,
                                    const TokenSequence& target) {
  ConsistencyReport report;
  if (PlacementSearch(plan, source, target).run()) {
    report.consistent = true;
    report.applied_result = target;
    return report;
  }
  try {
    TokenSequence applied = apply_plan(plan, source, ApplyPolicy::LeftmostCursor);
    report.divergence_index = first_divergence(applied, target);
    report.applied_result = std::move(applied);
  } catch (const PlanApplicationError&) {
    // applied_result stays absent
  }
  return report;
}

ConsistencyReport check_consistency(const TokenSequence& serialized_plan,
                                    const TokenSequence& source, const TokenSequence& target) {
  EditPlan plan;
  try {
    plan = parse_plan(serialized_plan);
  } catch (const MalformedPlan&) {
    return {};
  }
  return check_consistency(plan, source, target);
}

TokenSequence to_keep_annotated(const TokenSequence& source, const TokenSequence& target,
                                DiffBackend backend) {
  EditPlan plan;
  plan.positional = true;
  for (const auto& oc : detail::diff_opcodes(source, target, backend)) {
    plan.operations.push_back(op_from_opcode(oc, source, target));
  }
  return serialize_plan(plan);
}

}  // namespace coditkit
