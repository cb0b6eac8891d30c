#include "coditkit/rerank.hpp"

#include <algorithm>

#include "coditkit/edit_plan.hpp"
#include "coditkit/error.hpp"
#include "coditkit/task_formats.hpp"

namespace coditkit {

std::string_view to_string(RerankDirection direction) {
  return direction == RerankDirection::EditRerankedWithGen ? "edit-reranked-with-gen"
                                                           : "gen-reranked-with-edit";
}

std::optional<RerankDirection> rerank_direction_from_string(std::string_view name) {
  for (RerankDirection d :
       {RerankDirection::EditRerankedWithGen, RerankDirection::GenRerankedWithEdit}) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

double normalize_logprob(double logprob_sum, std::size_t length) {
  if (length == 0) throw ZeroLength();
  return logprob_sum / static_cast<double>(length);
}

double combine(double own_norm, double cross_norm) { return own_norm + cross_norm; }

TokenSequence wrap_generation_as_edit_output(const TokenSequence& editable_source,
                                             const TokenSequence& candidate_target) {
  TokenSequence out = serialize_plan(compute_edit_script(editable_source, candidate_target));
  out.emplace_back(markers::kSeparator);
  out.insert(out.end(), candidate_target.begin(), candidate_target.end());
  return out;
}

TokenSequence cross_scoring_sequence(const TokenSequence& candidate_tokens,
                                     const TokenSequence& editable_source,
                                     RerankDirection direction) {
  if (direction == RerankDirection::EditRerankedWithGen) {
    return extract_target(candidate_tokens).target;
  }
  return wrap_generation_as_edit_output(editable_source, candidate_tokens);
}

RerankedList rerank(const std::vector<Candidate>& candidates, RerankDirection /*direction*/) {
  RerankedList ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    if (!c.cross_logprob || !c.cross_length) throw MissingCrossScore(i);
    const double combined = combine(normalize_logprob(c.own_logprob, c.own_length),
                                    normalize_logprob(*c.cross_logprob, *c.cross_length));
    ranked.push_back({c, i, combined});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) {
                     return a.combined_score > b.combined_score;
                   });
  return ranked;
}

}  // namespace coditkit
