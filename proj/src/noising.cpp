#include "coditkit/noising.hpp"

#include <algorithm>
#include <cmath>

#include "coditkit/error.hpp"

namespace coditkit {

void SpanStats::validate() const {
  for (double p : {p_insert, p_delete, p_replace}) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("operation probability outside [0,1]");
  }
  if (std::abs(p_insert + p_delete + p_replace - 1.0) > 1e-9) {
    throw PreconditionError("operation probabilities must sum to 1");
  }
  if (!(mean_span_len > 0.0) || !(mean_spans_per_seq > 0.0)) {
    throw PreconditionError("span means must be positive");
  }
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::MaskSpan:
      return "mask-span";
    case NoiseKind::InsertMask:
      return "insert-mask";
    case NoiseKind::DeleteSpan:
      return "delete-span";
  }
  return "unknown";
}

std::optional<NoiseKind> noise_kind_from_string(std::string_view name) {
  for (NoiseKind k : {NoiseKind::MaskSpan, NoiseKind::InsertMask, NoiseKind::DeleteSpan}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void validate_noise_spec(const NoiseSpec& spec, std::size_t seq_len) {
  std::size_t frontier = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const NoiseSpan& span = spec[i];
    const bool zero_width = span.kind == NoiseKind::InsertMask;
    if (zero_width != (span.length == 0)) {
      throw SpecOutOfBounds("span " + std::to_string(i) + " has a length inconsistent with its kind");
    }
    if (span.start + span.length > seq_len) {
      throw SpecOutOfBounds("span " + std::to_string(i) + " exceeds the sequence");
    }
    if (span.start < frontier) {
      throw SpecOutOfBounds("span " + std::to_string(i) + " overlaps or is out of order");
    }
    frontier = span.start + span.length;
  }
}

SpanStats compute_span_stats(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                             DiffBackend backend) {
  if (pairs.empty()) throw EmptyCorpus();
  std::size_t inserts = 0, deletes = 0, replaces = 0, span_tokens = 0;
  for (const auto& [source, target] : pairs) {
    for (const auto& op : compute_edit_script(source, target, backend).operations) {
      switch (op.kind) {
        case OpKind::Insert:
          ++inserts;
          break;
        case OpKind::Delete:
          ++deletes;
          break;
        case OpKind::Replace:
          ++replaces;
          break;
        case OpKind::Keep:
          continue;
      }
      span_tokens += op.edited_tokens();
    }
  }
  const std::size_t ops = inserts + deletes + replaces;
  if (ops == 0) throw EmptyStats();
  const double total = static_cast<double>(ops);
  SpanStats stats;
  stats.p_insert = static_cast<double>(inserts) / total;
  stats.p_delete = static_cast<double>(deletes) / total;
  stats.p_replace = static_cast<double>(replaces) / total;
  stats.mean_span_len = static_cast<double>(span_tokens) / total;
  stats.mean_spans_per_seq = total / static_cast<double>(pairs.size());
  return stats;
}

namespace {

constexpr int kMaxPlacementAttempts = 16;

std::size_t draw_geometric(double mean, Rng& rng) {
  if (mean <= 1.0) return 1;
  const double p = 1.0 / mean;
  const double u = uniform_unit(rng);
  return 1 + static_cast<std::size_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

std::size_t draw_poisson(double lambda, Rng& rng) {
  // Knuth's product method, split into chunks so exp(-lambda) never underflows.
  std::size_t total = 0;
  while (lambda > 0.0) {
    const double chunk = std::min(lambda, 200.0);
    lambda -= chunk;
    const double limit = std::exp(-chunk);
    double product = uniform_unit(rng);
    while (product > limit) {
      ++total;
      product *= uniform_unit(rng);
    }
  }
  return total;
}

std::size_t draw_span_count(double mean, Rng& rng) {
  if (mean >= 1.0) return 1 + draw_poisson(mean - 1.0, rng);
  return uniform_unit(rng) < mean ? 1 : 0;
}

// Corruption is the inverse of the reconstruction edit.
NoiseKind draw_kind(const SpanStats& stats, Rng& rng) {
  const double u = uniform_unit(rng);
  if (u < stats.p_insert) return NoiseKind::DeleteSpan;
  if (u < stats.p_insert + stats.p_delete) return NoiseKind::InsertMask;
  return NoiseKind::MaskSpan;
}

// [start, start + length) must leave at least one untouched token between
// itself and every placed span.
bool separated(const NoiseSpec& placed, std::size_t start, std::size_t length) {
  const std::size_t end = start + length;
  return std::all_of(placed.begin(), placed.end(), [&](const NoiseSpan& q) {
    return end < q.start || q.start + q.length < start;
  });
}

}  // namespace

NoiseSpec sample_noise_spec(const SpanStats& stats, std::size_t seq_len, Rng& rng) {
  stats.validate();
  if (seq_len < kMinHostLength) return {};

  NoiseSpec spec;
  std::vector<std::size_t> starts;
  const std::size_t count = draw_span_count(stats.mean_spans_per_seq, rng);
  for (std::size_t s = 0; s < count; ++s) {
    const NoiseKind kind = draw_kind(stats, rng);
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      std::size_t length = 0;
      if (kind != NoiseKind::InsertMask) {
        length = draw_geometric(stats.mean_span_len, rng);
        if (length >= seq_len) continue;
      }
      starts.clear();
      for (std::size_t p = 0; p + length <= seq_len; ++p) {
        if (separated(spec, p, length)) starts.push_back(p);
      }
      if (starts.empty()) continue;
      const std::size_t start = starts[uniform_index(rng, starts.size())];
      NoiseSpan span{start, length, kind};
      spec.insert(std::upper_bound(spec.begin(), spec.end(), span,
                                   [](const NoiseSpan& a, const NoiseSpan& b) {
                                     return a.start < b.start;
                                   }),
                  span);
      break;
    }
  }
  return spec;
}

TokenSequence corrupt(const TokenSequence& seq, const NoiseSpec& spec) {
  validate_noise_spec(spec, seq.size());
  TokenSequence out = seq;
  for (auto it = spec.rbegin(); it != spec.rend(); ++it) {
    auto first = out.begin() + static_cast<std::ptrdiff_t>(it->start);
    switch (it->kind) {
      case NoiseKind::MaskSpan:
        first = out.erase(first, first + static_cast<std::ptrdiff_t>(it->length));
        out.emplace(first, markers::kMask);
        break;
      case NoiseKind::InsertMask:
        out.emplace(first, markers::kMask);
        break;
      case NoiseKind::DeleteSpan:
        out.erase(first, first + static_cast<std::ptrdiff_t>(it->length));
        break;
    }
  }
  return out;
}

bool length_filter(const TokenSequence& seq) {
  return seq.size() >= kMinSequenceLength && seq.size() <= kMaxSequenceLength;
}

PretrainExample make_pretrain_example(const TokenSequence& seq, const NoiseSpec& spec,
                                      std::string id) {
  if (!length_filter(seq)) {
    throw PreconditionError("sequence length " + std::to_string(seq.size()) +
                            " outside [3, 512]");
  }
  PretrainExample ex;
  ex.id = std::move(id);
  ex.corrupted = corrupt(seq, spec);
  ex.edit_plan = serialize_plan(compute_edit_script(ex.corrupted, seq));
  ex.target = seq;
  return ex;
}

PretrainExample make_pretrain_example(const TokenSequence& seq, const SpanStats& stats, Rng& rng,
                                      std::string id) {
  if (!length_filter(seq)) {
    throw PreconditionError("sequence length " + std::to_string(seq.size()) +
                            " outside [3, 512]");
  }
  return make_pretrain_example(seq, sample_noise_spec(stats, seq.size(), rng), std::move(id));
}

bool verify_example(const PretrainExample& example) {
  return check_consistency(example.edit_plan, example.corrupted, example.target).consistent;
}

}  // namespace coditkit
