#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "coditkit/rng.hpp"
#include "coditkit/tokens.hpp"

namespace coditkit {

enum class Metric { XMatch, Bleu4, Gleu, Sari };

std::string_view to_string(Metric metric);
std::optional<Metric> metric_from_string(std::string_view name);

// Variant names written into report metadata.
inline constexpr std::string_view kBleuVariant =
    "sentence bleu-4: arithmetic mean of clipped 1-4 gram precisions (orders without candidate "
    "n-grams skipped) x brevity penalty; 0 when unigram precision is 0";
inline constexpr std::string_view kGleuVariant =
    "sentence gleu: source-penalized 1-4 gram precisions, geometric mean over orders with "
    "candidate n-grams, brevity penalty, no smoothing, no tuning pass";
inline constexpr std::string_view kSariVariant =
    "sari: keep F1 and delete precision on clipped n-gram counts, add F1 on n-gram sets, 1-4 "
    "grams, single reference; empty denominators score 1 iff the paired set is also empty";

double xmatch(const TokenSequence& pred, const TokenSequence& ref);
double bleu4(const TokenSequence& pred, const TokenSequence& ref);
double gleu(const TokenSequence& pred, const TokenSequence& ref, const TokenSequence& source);
double sari(const TokenSequence& pred, const TokenSequence& ref, const TokenSequence& source);

double score(Metric metric, const TokenSequence& pred, const TokenSequence& ref,
             const TokenSequence& source);

struct MetricScores {
  double corpus = 0.0;
  std::vector<double> per_example;
};

struct MetricsReport {
  std::map<Metric, MetricScores> scores;
  std::size_t count = 0;
};

// Corpus score is the arithmetic mean of per-example scores.
MetricsReport evaluate_corpus(const std::vector<TokenSequence>& preds,
                              const std::vector<TokenSequence>& refs,
                              const std::vector<TokenSequence>& sources,
                              const std::vector<Metric>& metrics);

double mean(const std::vector<double>& values);

struct SignificanceResult {
  double observed_delta = 0.0;  // mean(a) - mean(b)
  double p_value = 1.0;
  std::size_t iterations = 0;
  double confidence = 0.95;

  bool significant() const { return p_value < 1.0 - confidence; }
};

inline constexpr std::size_t kMinBootstrapIterations = 1000;

// Paired bootstrap over example indices. p_value is twice the fraction of
// resamples whose mean delta fails to keep the observed sign, clamped to 1.
SignificanceResult bootstrap_test(const std::vector<double>& scores_a,
                                  const std::vector<double>& scores_b, std::size_t iterations,
                                  Rng& rng, double confidence = 0.95);

}  // namespace coditkit
