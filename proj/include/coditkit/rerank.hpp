#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "coditkit/tokens.hpp"

namespace coditkit {

enum class RerankDirection {
  // Edit-based model's beam, cross-scored by the generation model on the
  // target portion after <s>.
  EditRerankedWithGen,
  // Generation model's beam, cross-scored by the edit-based model on the
  // wrapped edit-based sequence.
  GenRerankedWithEdit,
};

std::string_view to_string(RerankDirection direction);
std::optional<RerankDirection> rerank_direction_from_string(std::string_view name);

struct Candidate {
  TokenSequence tokens;
  double own_logprob = 0.0;
  std::size_t own_length = 1;
  std::optional<double> cross_logprob;
  std::optional<std::size_t> cross_length;
};

struct RankedCandidate {
  Candidate candidate;
  std::size_t beam_rank = 0;
  double combined_score = 0.0;
};

// Sorted by combined score, descending; ties keep beam order.
using RerankedList = std::vector<RankedCandidate>;

// log(P^(1/N)) = logprob_sum / N. Throws ZeroLength when length is 0.
double normalize_logprob(double logprob_sum, std::size_t length);

double combine(double own_norm, double cross_norm);

// serialize(diff(editable_source, candidate_target)) <s> candidate_target
TokenSequence wrap_generation_as_edit_output(const TokenSequence& editable_source,
                                             const TokenSequence& candidate_target);

// The sequence the other model must score for this candidate.
TokenSequence cross_scoring_sequence(const TokenSequence& candidate_tokens,
                                     const TokenSequence& editable_source,
                                     RerankDirection direction);

// Throws MissingCrossScore for the first candidate lacking cross scores.
RerankedList rerank(const std::vector<Candidate>& candidates, RerankDirection direction);

}  // namespace coditkit
