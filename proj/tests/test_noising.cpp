#include <doctest.h>

#include <array>
#include <random>

#include "coditkit/error.hpp"
#include "coditkit/noising.hpp"
#include "support.hpp"

using namespace coditkit;
using coditkit::testing::toks;

namespace {

const TokenSequence kUsersOriginal = toks("@param users List of user objects");
const NoiseSpec kUsersSpec = {{1, 1, NoiseKind::MaskSpan}, {4, 1, NoiseKind::DeleteSpan}};

SpanStats mixed_stats() {
  SpanStats stats;
  stats.p_insert = 0.2;
  stats.p_delete = 0.3;
  stats.p_replace = 0.5;
  stats.mean_span_len = 3.0;
  stats.mean_spans_per_seq = 2.0;
  return stats;
}

}  // namespace

TEST_SUITE("noising_pipeline") {
  TEST_CASE("span stats validation") {
    SpanStats ok = mixed_stats();
    CHECK_NOTHROW(ok.validate());
    SpanStats bad = ok;
    bad.p_replace = 0.6;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad = ok;
    bad.mean_span_len = 0.0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad = ok;
    bad.p_insert = -0.1;
    bad.p_replace = 0.8;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
  }

  TEST_CASE("compute span stats") {
    // "a b" -> "a c" is one Replace; "a b" -> "a" is one Delete.
    SpanStats stats = compute_span_stats({{toks("a b"), toks("a c")}, {toks("a b"), toks("a")}});
    CHECK(stats.p_replace == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats.p_delete == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats.p_insert == 0.0);
    CHECK(stats.mean_span_len == 1.0);
    CHECK(stats.mean_spans_per_seq == 1.0);

    CHECK_THROWS_AS(compute_span_stats({}), EmptyCorpus);
    CHECK_THROWS_AS(compute_span_stats({{toks("a b"), toks("a b")}, {toks("c"), toks("c")}}),
                    EmptyStats);
  }

  TEST_CASE("compute span stats counts span lengths and identical pairs") {
    // Insert of 2 tokens, Replace 1->3, and an unchanged pair.
    SpanStats stats = compute_span_stats({{toks("a d"), toks("a b c d")},
                                          {toks("x y z"), toks("x p q r z")},
                                          {toks("k"), toks("k")}});
    CHECK(stats.p_insert == 0.5);
    CHECK(stats.p_replace == 0.5);
    CHECK(stats.mean_span_len == 2.5);
    CHECK(stats.mean_spans_per_seq == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("sample noise spec: infeasible and point distributions") {
    Rng rng(1);
    SpanStats long_spans = mixed_stats();
    long_spans.mean_span_len = 5.0;
    CHECK(sample_noise_spec(long_spans, 1, rng).empty());

    SpanStats point;
    point.p_replace = 1.0;
    point.mean_span_len = 1.0;
    point.mean_spans_per_seq = 1.0;
    for (std::uint64_t seed : {42ULL, 1ULL, 2ULL, 3ULL}) {
      Rng r(seed);
      NoiseSpec spec = sample_noise_spec(point, 5, r);
      REQUIRE(spec.size() == 1);
      CHECK(spec[0].kind == NoiseKind::MaskSpan);
      CHECK(spec[0].length == 1);
      CHECK(spec[0].start < 5);
    }
  }

  TEST_CASE("sampled specs are valid and separated") {
    Rng rng(99);
    SpanStats stats = mixed_stats();
    stats.mean_spans_per_seq = 4.0;
    for (int i = 0; i < 2000; ++i) {
      std::size_t len = 2 + static_cast<std::size_t>(uniform_index(rng, 60));
      NoiseSpec spec = sample_noise_spec(stats, len, rng);
      CHECK_NOTHROW(validate_noise_spec(spec, len));
      for (std::size_t k = 1; k < spec.size(); ++k) {
        CHECK(spec[k - 1].start + spec[k - 1].length < spec[k].start);
      }
      for (const auto& s : spec) CHECK(s.length < len);
    }
  }

  TEST_CASE("kind frequencies and span length track the configuration") {
    Rng rng(2024);
    SpanStats stats = mixed_stats();
    std::array<std::size_t, 3> kinds{};
    std::size_t consuming = 0, consumed = 0, spans = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      for (const auto& s : sample_noise_spec(stats, 100, rng)) {
        ++kinds[static_cast<std::size_t>(s.kind)];
        ++spans;
        if (s.kind != NoiseKind::InsertMask) {
          ++consuming;
          consumed += s.length;
        }
      }
    }
    const double n = static_cast<double>(spans);
    CHECK(std::abs(kinds[static_cast<int>(NoiseKind::DeleteSpan)] / n - 0.2) < 0.02);
    CHECK(std::abs(kinds[static_cast<int>(NoiseKind::InsertMask)] / n - 0.3) < 0.02);
    CHECK(std::abs(kinds[static_cast<int>(NoiseKind::MaskSpan)] / n - 0.5) < 0.02);
    const double mean_len = static_cast<double>(consumed) / static_cast<double>(consuming);
    CHECK(std::abs(mean_len / 3.0 - 1.0) < 0.05);
    CHECK(std::abs(n / draws / 2.0 - 1.0) < 0.05);
  }

  TEST_CASE("corrupt") {
    CHECK(corrupt(kUsersOriginal, kUsersSpec) == toks("@param [MASK] List of objects"));
    CHECK(corrupt(kUsersOriginal, {}) == kUsersOriginal);
    CHECK(corrupt(toks("a b"), {{1, 0, NoiseKind::InsertMask}}) == toks("a [MASK] b"));
    CHECK(corrupt(toks("a b c d"), {{1, 2, NoiseKind::MaskSpan}}) == toks("a [MASK] d"));
    CHECK(corrupt(toks("a b"), {{0, 0, NoiseKind::InsertMask}, {0, 1, NoiseKind::DeleteSpan}}) ==
          toks("[MASK] b"));
  }

  TEST_CASE("corrupt rejects invalid specs") {
    CHECK_THROWS_AS(corrupt(toks("a b"), {{1, 2, NoiseKind::MaskSpan}}), SpecOutOfBounds);
    CHECK_THROWS_AS(corrupt(toks("a b c"), {{1, 1, NoiseKind::MaskSpan}, {0, 1, NoiseKind::DeleteSpan}}),
                    SpecOutOfBounds);
    CHECK_THROWS_AS(corrupt(toks("a b c"), {{0, 2, NoiseKind::MaskSpan}, {1, 1, NoiseKind::DeleteSpan}}),
                    SpecOutOfBounds);
    CHECK_THROWS_AS(corrupt(toks("a b"), {{3, 0, NoiseKind::InsertMask}}), SpecOutOfBounds);
    CHECK_THROWS_AS(corrupt(toks("a b"), {{0, 1, NoiseKind::InsertMask}}), SpecOutOfBounds);
    CHECK_THROWS_AS(corrupt(toks("a b"), {{0, 0, NoiseKind::MaskSpan}}), SpecOutOfBounds);
  }

  TEST_CASE("length filter bounds") {
    CHECK_FALSE(length_filter(TokenSequence(2, "x")));
    CHECK(length_filter(TokenSequence(3, "x")));
    CHECK(length_filter(TokenSequence(512, "x")));
    CHECK_FALSE(length_filter(TokenSequence(513, "x")));
    CHECK_FALSE(length_filter({}));
  }

  TEST_CASE("users example pretraining example") {
    PretrainExample ex = make_pretrain_example(kUsersOriginal, kUsersSpec, "users");
    CHECK(ex.id == "users");
    CHECK(ex.corrupted == toks("@param [MASK] List of objects"));
    CHECK(ex.edit_plan ==
          toks("<ReplaceOld> [MASK] <ReplaceNew> users <ReplaceEnd> <Insert> user <InsertEnd>"));
    CHECK(ex.target == kUsersOriginal);
    CHECK(verify_example(ex));
  }

  TEST_CASE("empty spec yields an empty plan") {
    PretrainExample ex = make_pretrain_example(toks("a b c"), NoiseSpec{}, "e");
    CHECK(ex.corrupted == ex.target);
    CHECK(ex.edit_plan.empty());
    CHECK_THROWS_AS(make_pretrain_example(toks("a b"), NoiseSpec{}, "short"), PreconditionError);
  }

  TEST_CASE("random examples reconstruct and are deterministic") {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 500; ++i) {
      auto seq = coditkit::testing::random_sequence(gen, 80, 8);
      if (!length_filter(seq)) continue;
      SpanStats stats;
      double a = static_cast<double>(gen() % 100), b = static_cast<double>(gen() % 100),
             c = static_cast<double>(gen() % 100) + 1.0;
      stats.p_insert = a / (a + b + c);
      stats.p_delete = b / (a + b + c);
      stats.p_replace = 1.0 - stats.p_insert - stats.p_delete;
      stats.mean_span_len = 1.0 + static_cast<double>(gen() % 40) / 10.0;
      stats.mean_spans_per_seq = 0.5 + static_cast<double>(gen() % 30) / 10.0;

      Rng r1 = derive_rng(5, static_cast<std::uint64_t>(i));
      Rng r2 = derive_rng(5, static_cast<std::uint64_t>(i));
      PretrainExample ex = make_pretrain_example(seq, stats, r1, std::to_string(i));
      PretrainExample again = make_pretrain_example(seq, stats, r2, std::to_string(i));
      CHECK(ex.corrupted == again.corrupted);
      CHECK(ex.edit_plan == again.edit_plan);
      CHECK(verify_example(ex));
      CHECK(length_filter(ex.target));
    }
  }
}
