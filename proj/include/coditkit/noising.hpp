#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coditkit/edit_plan.hpp"
#include "coditkit/rng.hpp"
#include "coditkit/tokens.hpp"

namespace coditkit {

// Per-corpus edit statistics that drive corruption.
struct SpanStats {
  double p_insert = 0.0;
  double p_delete = 0.0;
  double p_replace = 0.0;
  double mean_span_len = 1.0;
  double mean_spans_per_seq = 1.0;

  // Throws PreconditionError on probabilities outside [0,1], a sum off 1 by
  // more than 1e-9, or non-positive means.
  void validate() const;
};

enum class NoiseKind {
  MaskSpan,    // span replaced by a single [MASK]
  InsertMask,  // one [MASK] inserted at span_start (span_len 0)
  DeleteSpan,  // span removed
};

std::string_view to_string(NoiseKind kind);
std::optional<NoiseKind> noise_kind_from_string(std::string_view name);

struct NoiseSpan {
  std::size_t start = 0;
  std::size_t length = 0;
  NoiseKind kind = NoiseKind::MaskSpan;

  friend bool operator==(const NoiseSpan&, const NoiseSpan&) = default;
};

// Spans sorted by start and non-overlapping. Sampled specs additionally keep
// at least one untouched token between neighbouring spans.
using NoiseSpec = std::vector<NoiseSpan>;

// Throws SpecOutOfBounds when spec is unsorted, overlapping or out of range.
void validate_noise_spec(const NoiseSpec& spec, std::size_t seq_len);

struct PretrainExample {
  std::string id;
  TokenSequence corrupted;
  TokenSequence edit_plan;
  TokenSequence target;
};

inline constexpr std::size_t kMinSequenceLength = 3;
inline constexpr std::size_t kMaxSequenceLength = 512;

// Sequences of fewer than this many tokens host no corruption spans: a span
// needs at least one untouched context token beside it.
inline constexpr std::size_t kMinHostLength = 2;

// Span lengths are geometric on {1, 2, ...}; span counts are 1 + Poisson for
// means >= 1 and Bernoulli below. Both match the configured means exactly.
inline constexpr std::string_view kSpanLengthDistribution = "geometric(mean=mean_span_len)";
inline constexpr std::string_view kSpanCountDistribution =
    "1+poisson(mean_spans_per_seq-1) if mean>=1 else bernoulli(mean_spans_per_seq)";

// Operation statistics over compute_edit_script(source, target) for every
// pair. Throws EmptyCorpus on no pairs and EmptyStats if no edit is observed.
SpanStats compute_span_stats(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                             DiffBackend backend = DiffBackend::ContiguousLongestMatch);

NoiseSpec sample_noise_spec(const SpanStats& stats, std::size_t seq_len, Rng& rng);

TokenSequence corrupt(const TokenSequence& seq, const NoiseSpec& spec);

bool length_filter(const TokenSequence& seq);

PretrainExample make_pretrain_example(const TokenSequence& seq, const NoiseSpec& spec,
                                      std::string id);
PretrainExample make_pretrain_example(const TokenSequence& seq, const SpanStats& stats, Rng& rng,
                                      std::string id);

// True when the example's plan parses and reconstructs its target from the
// corrupted input (see check_consistency).
bool verify_example(const PretrainExample& example);

}  // namespace coditkit
