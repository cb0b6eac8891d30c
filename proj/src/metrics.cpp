#include "coditkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "coditkit/error.hpp"

namespace coditkit {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::XMatch:
      return "xmatch";
    case Metric::Bleu4:
      return "bleu4";
    case Metric::Gleu:
      return "gleu";
    case Metric::Sari:
      return "sari";
  }
  return "unknown";
}

std::optional<Metric> metric_from_string(std::string_view name) {
  for (Metric m : {Metric::XMatch, Metric::Bleu4, Metric::Gleu, Metric::Sari}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

constexpr std::size_t kMaxOrder = 4;

using NgramCounts = std::unordered_map<std::string, std::size_t>;

// Length-prefixed join, so distinct token tuples never collide.
NgramCounts count_ngrams(const TokenSequence& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    std::string key;
    for (std::size_t k = i; k < i + n; ++k) {
      key += std::to_string(seq[k].size());
      key.push_back(':');
      key += seq[k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t count_of(const NgramCounts& counts, const std::string& key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

std::size_t total(const NgramCounts& counts) {
  std::size_t sum = 0;
  for (const auto& [key, c] : counts) sum += c;
  return sum;
}

std::size_t clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  std::size_t sum = 0;
  for (const auto& [key, c] : candidate) sum += std::min(c, count_of(reference, key));
  return sum;
}

double f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// numerator / denominator, with an empty denominator scoring 1 exactly when
// the paired set is empty too.
double ratio(std::size_t numerator, std::size_t denominator, bool paired_empty) {
  if (denominator == 0) return paired_empty ? 1.0 : 0.0;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

double xmatch(const TokenSequence& pred, const TokenSequence& ref) {
  return pred == ref ? 1.0 : 0.0;
}

double bleu4(const TokenSequence& pred, const TokenSequence& ref) {
  if (pred.empty()) return ref.empty() ? 1.0 : 0.0;
  double precision_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    NgramCounts cand = count_ngrams(pred, n);
    const std::size_t cand_total = total(cand);
    if (cand_total == 0) continue;
    const std::size_t matched = clipped_overlap(cand, count_ngrams(ref, n));
    if (n == 1 && matched == 0) return 0.0;
    precision_sum += static_cast<double>(matched) / static_cast<double>(cand_total);
    ++orders;
  }
  const double c = static_cast<double>(pred.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return brevity * precision_sum / static_cast<double>(orders);
}

double gleu(const TokenSequence& pred, const TokenSequence& ref, const TokenSequence& source) {
  if (pred.empty()) return ref.empty() ? 1.0 : 0.0;
  double log_precision = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    if (pred.size() < n) break;
    NgramCounts hyp = count_ngrams(pred, n);
    NgramCounts reference = count_ngrams(ref, n);
    NgramCounts source_only = count_ngrams(source, n);
    for (auto it = source_only.begin(); it != source_only.end();) {
      it = reference.count(it->first) ? source_only.erase(it) : std::next(it);
    }
    const std::size_t rewarded = clipped_overlap(hyp, reference);
    const std::size_t penalized = clipped_overlap(hyp, source_only);
    if (rewarded <= penalized) return 0.0;
    const double denominator = static_cast<double>(pred.size() + 1 - n);
    log_precision += std::log(static_cast<double>(rewarded - penalized) / denominator);
    ++orders;
  }
  const double c = static_cast<double>(pred.size());
  const double r = static_cast<double>(ref.size());
  return std::exp(std::min(0.0, 1.0 - r / c) + log_precision / static_cast<double>(orders));
}

double sari(const TokenSequence& pred, const TokenSequence& ref, const TokenSequence& source) {
  double sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts s = count_ngrams(source, n);
    const NgramCounts c = count_ngrams(pred, n);
    const NgramCounts r = count_ngrams(ref, n);

    std::size_t keep_good = 0, keep_cand = 0, keep_gold = 0;
    std::size_t del_good = 0, del_cand = 0, del_gold = 0;
    for (const auto& [g, sc] : s) {
      const std::size_t cc = count_of(c, g);
      const std::size_t rc = count_of(r, g);
      const std::size_t kept = std::min(sc, cc);
      keep_cand += kept;
      keep_gold += std::min(sc, rc);
      keep_good += std::min(kept, rc);
      const std::size_t deleted = sc > cc ? sc - cc : 0;
      const std::size_t should_delete = sc > rc ? sc - rc : 0;
      del_cand += deleted;
      del_gold += should_delete;
      del_good += std::min(deleted, should_delete);
    }

    std::size_t add_cand = 0, add_gold = 0, add_good = 0;
    for (const auto& [g, cc] : c) {
      if (s.count(g)) continue;
      ++add_cand;
      if (r.count(g)) ++add_good;
    }
    for (const auto& [g, rc] : r) {
      if (!s.count(g)) ++add_gold;
    }

    const double keep_f1 = f1(ratio(keep_good, keep_cand, keep_gold == 0),
                              ratio(keep_good, keep_gold, keep_cand == 0));
    const double del_p = ratio(del_good, del_cand, del_gold == 0);
    const double add_f1 = f1(ratio(add_good, add_cand, add_gold == 0),
                             ratio(add_good, add_gold, add_cand == 0));
    sum += (keep_f1 + del_p + add_f1) / 3.0;
  }
  return sum / static_cast<double>(kMaxOrder);
}

double score(Metric metric, const TokenSequence& pred, const TokenSequence& ref,
             const TokenSequence& source) {
  switch (metric) {
    case Metric::XMatch:
      return xmatch(pred, ref);
    case Metric::Bleu4:
      return bleu4(pred, ref);
    case Metric::Gleu:
      return gleu(pred, ref, source);
    case Metric::Sari:
      return sari(pred, ref, source);
  }
  return 0.0;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

MetricsReport evaluate_corpus(const std::vector<TokenSequence>& preds,
                              const std::vector<TokenSequence>& refs,
                              const std::vector<TokenSequence>& sources,
                              const std::vector<Metric>& metrics) {
  if (preds.size() != refs.size()) throw LengthMismatch(preds.size(), refs.size());
  if (preds.size() != sources.size()) throw LengthMismatch(preds.size(), sources.size());
  MetricsReport report;
  report.count = preds.size();
  for (Metric metric : metrics) {
    MetricScores& entry = report.scores[metric];
    entry.per_example.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      entry.per_example.push_back(score(metric, preds[i], refs[i], sources[i]));
    }
    entry.corpus = mean(entry.per_example);
  }
  return report;
}

SignificanceResult bootstrap_test(const std::vector<double>& scores_a,
                                  const std::vector<double>& scores_b, std::size_t iterations,
                                  Rng& rng, double confidence) {
  if (scores_a.size() != scores_b.size()) throw LengthMismatch(scores_a.size(), scores_b.size());
  if (scores_a.size() < 2) throw PreconditionError("bootstrap needs at least 2 paired examples");
  if (iterations < kMinBootstrapIterations) {
    throw PreconditionError("bootstrap needs at least 1000 iterations");
  }
  const std::size_t n = scores_a.size();
  std::vector<double> deltas(n);
  for (std::size_t i = 0; i < n; ++i) deltas[i] = scores_a[i] - scores_b[i];

  SignificanceResult result;
  result.observed_delta = mean(deltas);
  result.iterations = iterations;
  result.confidence = confidence;

  const double sign = result.observed_delta > 0.0 ? 1.0 : (result.observed_delta < 0.0 ? -1.0 : 0.0);
  std::size_t flips = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += deltas[uniform_index(rng, n)];
    if (sign * (sum / static_cast<double>(n)) <= 0.0) ++flips;
  }
  result.p_value =
      std::min(1.0, 2.0 * static_cast<double>(flips) / static_cast<double>(iterations));
  return result;
}

}  // namespace coditkit
