#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coditkit {

// Every failure raised by the library derives from Error and carries a stable
// machine-readable code. The CLI maps these onto exit status 3.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("PreconditionViolation", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("ParseError", message) {}
};

class MissingMarker : public Error {
 public:
  explicit MissingMarker(const std::string& marker)
      : Error("MissingMarker", "vocabulary lacks reserved marker " + marker), marker_(marker) {}

  const std::string& marker() const noexcept { return marker_; }

 private:
  std::string marker_;
};

class UnknownToken : public Error {
 public:
  explicit UnknownToken(const std::string& token)
      : Error("UnknownToken", "token cannot be realized: '" + token + "'"), token_(token) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

enum class MalformedReason { Unterminated, NestedMarker, EmptySpan, StrayToken };

const char* to_string(MalformedReason reason);

class MalformedPlan : public Error {
 public:
  MalformedPlan(std::size_t position, MalformedReason reason)
      : Error("MalformedPlan", "malformed edit plan at token " + std::to_string(position) + ": " +
                                   to_string(reason)),
        position_(position),
        reason_(reason) {}

  std::size_t position() const noexcept { return position_; }
  MalformedReason reason() const noexcept { return reason_; }

 private:
  std::size_t position_;
  MalformedReason reason_;
};

// Raised by apply_plan; op_index names the offending operation.
class PlanApplicationError : public Error {
 public:
  PlanApplicationError(std::string code, std::size_t op_index, const std::string& message)
      : Error(std::move(code), message + " (operation " + std::to_string(op_index) + ")"),
        op_index_(op_index) {}

  std::size_t op_index() const noexcept { return op_index_; }

 private:
  std::size_t op_index_;
};

class SpanNotFound : public PlanApplicationError {
 public:
  explicit SpanNotFound(std::size_t op_index)
      : PlanApplicationError("SpanNotFound", op_index, "old span not found at or after cursor") {}
};

class AmbiguousInsert : public PlanApplicationError {
 public:
  explicit AmbiguousInsert(std::size_t op_index)
      : PlanApplicationError("AmbiguousInsert", op_index, "insert has no anchoring operation") {}
};

class PositionMismatch : public PlanApplicationError {
 public:
  explicit PositionMismatch(std::size_t op_index)
      : PlanApplicationError("PositionMismatch", op_index,
                             "recorded position does not match the source") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("EmptyCorpus", "no sequence pairs supplied") {}
};

class EmptyStats : public Error {
 public:
  EmptyStats() : Error("EmptyStats", "no edit operations observed in corpus") {}
};

class SpecOutOfBounds : public Error {
 public:
  explicit SpecOutOfBounds(const std::string& message) : Error("SpecOutOfBounds", message) {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t left, std::size_t right)
      : Error("LengthMismatch", "length mismatch: " + std::to_string(left) + " vs " +
                                    std::to_string(right)) {}
};

class ZeroLength : public Error {
 public:
  ZeroLength() : Error("ZeroLength", "normalization length must be at least 1") {}
};

class MissingCrossScore : public Error {
 public:
  explicit MissingCrossScore(std::size_t index)
      : Error("MissingCrossScore",
              "candidate " + std::to_string(index) + " has no cross-model score"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace coditkit
