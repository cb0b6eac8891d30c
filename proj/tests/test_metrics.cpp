#include <doctest.h>

#include <cmath>
#include <random>

#include "coditkit/error.hpp"
#include "coditkit/metrics.hpp"
#include "metric_oracles.hpp"
#include "support.hpp"

using namespace coditkit;
using coditkit::testing::toks;

namespace {

struct FrozenCase {
  const char* pred;
  const char* ref;
  const char* source;
  double bleu4;
  double gleu;
  double sari;
};

const FrozenCase kFrozen[] = {
#include "metric_cases.inc"
};

TokenSequence relabel(const TokenSequence& seq) {
  TokenSequence out;
  for (const auto& t : seq) out.push_back("#" + t + "#");
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("xmatch") {
    auto t = toks("a b c");
    CHECK(xmatch(t, t) == 1.0);
    CHECK(xmatch(t, toks("a b c x")) == 0.0);
    CHECK(xmatch(toks("a b"), toks("a B")) == 0.0);
  }

  TEST_CASE("bleu4 worked values") {
    auto t = toks("the cat sat on the mat");
    CHECK(bleu4(t, t) == 1.0);
    CHECK(bleu4(toks("a b c"), toks("x y z")) == 0.0);
    // p1 = p2 = p3 = 1, no 4-grams, BP = exp(1 - 4/3).
    CHECK(std::abs(bleu4(toks("the cat sat"), toks("the cat sat down")) - std::exp(-1.0 / 3.0)) <
          1e-12);
    CHECK(bleu4({}, {}) == 1.0);
    CHECK(bleu4({}, toks("a")) == 0.0);
  }

  TEST_CASE("gleu boundary values") {
    auto t = toks("if ( x ) return ;");
    CHECK(gleu(t, t, t) == 1.0);
    // Prediction copies the source; the reference shares nothing.
    CHECK(gleu(toks("a b c d"), toks("w x y z"), toks("a b c d")) == 0.0);
    CHECK(gleu(toks("a b"), toks("a b"), toks("a b")) == 1.0);
  }

  TEST_CASE("sari boundary values") {
    auto t = toks("a b c d e");
    CHECK(sari(t, t, t) == 1.0);
    CHECK(sari(toks("x"), toks("x"), toks("x")) == 1.0);
    CHECK(sari({}, {}, {}) == 1.0);
    // Prediction == source, reference adds material: add F1 is 0 in every
    // order, so at most 2/3.
    CHECK(sari(toks("a b c"), toks("a b c d"), toks("a b c")) <= 2.0 / 3.0 + 1e-12);
  }

  TEST_CASE("frozen oracle values") {
    for (const auto& c : kFrozen) {
      CAPTURE(c.pred);
      CAPTURE(c.ref);
      CAPTURE(c.source);
      auto p = toks(c.pred), r = toks(c.ref), s = toks(c.source);
      CHECK(std::abs(bleu4(p, r) - c.bleu4) < 1e-9);
      CHECK(std::abs(gleu(p, r, s) - c.gleu) < 1e-9);
      CHECK(std::abs(sari(p, r, s) - c.sari) < 1e-9);
    }
  }

  TEST_CASE("brute-force oracle agreement on random triples") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 400; ++i) {
      auto s = coditkit::testing::random_sequence(rng, 12, 4);
      auto p = coditkit::testing::random_sequence(rng, 12, 4);
      auto r = coditkit::testing::random_sequence(rng, 12, 4);
      if (i % 5 == 0) p = s;
      if (i % 7 == 0) r = p;
      CHECK(std::abs(bleu4(p, r) - coditkit::testing::oracle_bleu4(p, r)) < 1e-12);
      CHECK(std::abs(gleu(p, r, s) - coditkit::testing::oracle_gleu(p, r, s)) < 1e-12);
      CHECK(std::abs(sari(p, r, s) - coditkit::testing::oracle_sari(p, r, s)) < 1e-12);
    }
  }

  TEST_CASE("range, identity implications and relabeling invariance") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 400; ++i) {
      auto s = coditkit::testing::random_sequence(rng, 10, 3);
      auto p = coditkit::testing::random_sequence(rng, 10, 3);
      auto r = i % 3 == 0 ? p : coditkit::testing::random_sequence(rng, 10, 3);
      for (Metric m : {Metric::XMatch, Metric::Bleu4, Metric::Gleu, Metric::Sari}) {
        double v = score(m, p, r, s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      if (xmatch(p, r) == 1.0) {
        CHECK(bleu4(p, r) == 1.0);
        CHECK(gleu(p, r, s) == 1.0);
      }
      CHECK(sari(p, r, s) == sari(relabel(p), relabel(r), relabel(s)));
      CHECK(gleu(p, r, s) == gleu(relabel(p), relabel(r), relabel(s)));
    }
  }

  TEST_CASE("evaluate corpus") {
    std::vector<TokenSequence> a = {toks("a b c"), toks("d e")};
    std::vector<TokenSequence> z = {toks("x y z"), toks("w v")};
    const std::vector<Metric> all = {Metric::XMatch, Metric::Bleu4, Metric::Gleu, Metric::Sari};

    MetricsReport same = evaluate_corpus(a, a, a, all);
    CHECK(same.count == 2);
    for (const auto& [m, s] : same.scores) CHECK(s.corpus == 1.0);

    MetricsReport disjoint = evaluate_corpus(z, a, a, all);
    CHECK(disjoint.scores.at(Metric::XMatch).corpus == 0.0);

    std::vector<TokenSequence> mixed_pred = {a[0], z[1]};
    MetricsReport mixed = evaluate_corpus(mixed_pred, a, a, all);
    for (const auto& [m, s] : mixed.scores) {
      CHECK(s.corpus == (s.per_example[0] + s.per_example[1]) / 2.0);
      CHECK(s.per_example[0] == same.scores.at(m).per_example[0]);
      CHECK(s.per_example[1] == disjoint.scores.at(m).per_example[1]);
    }
    CHECK_THROWS_AS(evaluate_corpus(a, {a[0]}, a, all), LengthMismatch);
  }

  TEST_CASE("bootstrap test") {
    Rng rng(3);
    std::vector<double> xs = {0.1, 0.5, 0.9, 0.3};
    auto same = bootstrap_test(xs, xs, 1000, rng);
    CHECK(same.observed_delta == 0.0);
    CHECK(same.p_value == 1.0);

    std::vector<double> ones(100, 1.0), zeros(100, 0.0);
    Rng r2(7);
    auto strong = bootstrap_test(ones, zeros, 2000, r2);
    CHECK(strong.observed_delta == 1.0);
    CHECK(strong.p_value < 0.05);
    CHECK(strong.significant());

    Rng r3(1);
    CHECK_THROWS_AS(bootstrap_test({1.0}, {0.0}, 1000, r3), PreconditionError);
    CHECK_THROWS_AS(bootstrap_test({1.0, 0.0}, {0.0}, 1000, r3), LengthMismatch);
    CHECK_THROWS_AS(bootstrap_test({1.0, 0.0}, {0.0, 1.0}, 10, r3), PreconditionError);
  }

  TEST_CASE("bootstrap swap antisymmetry") {
    std::mt19937_64 gen(13);
    for (int round = 0; round < 20; ++round) {
      std::vector<double> a(30), b(30);
      for (auto& v : a) v = static_cast<double>(gen() % 100) / 100.0;
      for (auto& v : b) v = static_cast<double>(gen() % 100) / 100.0;
      Rng r1(round), r2(round);
      auto ab = bootstrap_test(a, b, 1000, r1);
      auto ba = bootstrap_test(b, a, 1000, r2);
      CHECK(ab.observed_delta == -ba.observed_delta);
      CHECK(ab.p_value == ba.p_value);
      CHECK(ab.p_value >= 0.0);
      CHECK(ab.p_value <= 1.0);
    }
  }
}
