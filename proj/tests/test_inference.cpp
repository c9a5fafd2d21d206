#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "symclust/covergen.hpp"
#include "symclust/inference.hpp"
#include "symclust/oracle.hpp"

using namespace symclust;
using namespace symclust::testing;
using doctest::Approx;

namespace {

// Goldens from tests/tools/paperkb_goldens.py (exact rational enumeration of 2^6 states).
constexpr double kFixtureNumerator = 0.026170747696883691;
constexpr double kFixtureEvidence = 0.033251247742493689;
constexpr double kFixturePosterior = 0.787060620989527;
constexpr double kFixtureNumeratorNegS5 = 0.0024651711490275177;
constexpr double kFixtureEvidenceNegS5 = 0.004120195924632618;
constexpr double kFixturePosteriorNegS5 = 0.59831405936049697;

bool rel_close(double got, double want, double tol) { return std::fabs(got - want) <= tol * std::fabs(want); }

EvalOptions naive_opts() {
  EvalOptions o;
  o.naive = true;
  return o;
}

}  // namespace

TEST_CASE("failure_factor on tiny2") {
  auto kb = tiny2();
  CHECK(failure_factor(kb, kb.disorder("d1"), absent(kb, {"s1"})) == Approx(0.84).epsilon(1e-15));
  CHECK(failure_factor(kb, kb.disorder("d2"), absent(kb, {"s1", "s2"})) == Approx(0.905).epsilon(1e-15));
  CHECK(failure_factor(kb, kb.disorder("d1"), absent(kb, {})) == 1.0);
  CHECK(failure_factor(kb, kb.disorder("d2"), absent(kb, {})) == 1.0);
  CHECK(failure_factor(kb, kb.disorder("d1"), absent(kb, {"s2"})) == 1.0);  // s2 is no effect of d1
  CHECK_THROWS_AS(failure_factor(kb, DisorderId(5u), absent(kb, {})), ValidationError);
}

TEST_CASE("differential_term and residual_term on tiny2") {
  auto kb = tiny2();
  auto both = disorders(kb, {"d1", "d2"});
  CHECK(differential_term(kb, both, absent(kb, {"s1"})) == Approx(0.078).epsilon(1e-14));
  CHECK(differential_term(kb, both, absent(kb, {})) == Approx(0.28).epsilon(1e-14));
  CHECK_THROWS_AS(differential_term(kb, kb.no_disorders(), absent(kb, {})), ValidationError);

  CHECK(residual_term(kb, kb.no_disorders(), absent(kb, {"s1"})) == 1.0);
  CHECK(residual_term(kb, disorders(kb, {"d1"}), absent(kb, {"s1"})) == Approx(0.84).epsilon(1e-15));
  CHECK(residual_term(kb, both, absent(kb, {})) == 1.0);

  // four-state cross-check of 0.078: p(s1 absent, d1 or d2 present)
  double by_states = 0.2 * 0.9 * 0.2 + 0.8 * 0.1 * 0.5 + 0.2 * 0.1 * 0.2 * 0.5;
  CHECK(differential_term(kb, both, absent(kb, {"s1"})) == Approx(by_states).epsilon(1e-14));
}

TEST_CASE("differential_term with a certain disorder drops the subtraction") {
  auto kb = parse_kb(R"({"disorders":[{"id":"d","prior":1}],"symptoms":["a","b"],
      "links":[{"disorder":"d","symptom":"a","strength":0.3},{"disorder":"d","symptom":"b","strength":0.6}]})");
  CHECK(differential_term(kb, disorders(kb, {"d"}), absent(kb, {"a", "b"})) == Approx(0.7 * 0.4).epsilon(1e-15));
}

TEST_CASE("joint_absent_and_cands") {
  auto tk = tiny2();
  auto one = make_clustering(tk, {{{"s1"}, {"d1", "d2"}}});
  CHECK(joint_absent_and_cands(tk, one, absent(tk, {})) == Approx(0.28).epsilon(1e-14));
  CHECK(joint_absent_and_cands(tk, one, absent(tk, {"s1"})) == Approx(0.078).epsilon(1e-14));

  auto kb = paperkb_u();
  CHECK(joint_absent_and_cands(kb, paper_clustering(kb), absent(kb, {})) == Approx(0.0361).epsilon(1e-14));

  auto overlapping = make_clustering(kb, {{{"s1"}, {"d2", "d4"}}, {{"s4"}, {"d2", "d6"}}});
  CHECK_THROWS_AS(joint_absent_and_cands(kb, overlapping, absent(kb, {})), ValidationError);
}

TEST_CASE("numerator") {
  auto tk = tiny2();
  auto one = make_clustering(tk, {{{"s1"}, {"d1", "d2"}}});
  CHECK(numerator(tk, one, make_case(tk, {"s1"}, {})) == Approx(0.202).epsilon(1e-14));

  auto kb = paperkb_u();
  auto all4 = make_case(kb, {"s1", "s2", "s3", "s4"}, {});
  CHECK(rel_close(numerator(kb, paper_clustering(kb), all4), kFixtureNumerator, 1e-12));
  CHECK(rel_close(numerator(kb, paper_clustering(kb), all4, naive_opts()), kFixtureNumerator, 1e-12));

  SUBCASE("no evidence gives the prior of the Cands event") {
    auto none = make_case(kb, {}, {});
    auto c = make_clustering(kb, {{{}, {"d2", "d4"}}, {{}, {"d1", "d3"}}});
    // Empty clusters are invalid; use the P = {} semantics through the joint term instead.
    CHECK(joint_absent_and_cands(kb, paper_clustering(kb), absent(kb, {})) ==
          Approx((1 - 0.9 * 0.9) * (1 - 0.9 * 0.9)).epsilon(1e-14));
    CHECK_THROWS_AS(numerator(kb, c, none), ValidationError);
  }
  SUBCASE("cap") {
    EvalOptions o;
    o.max_positive = 3;
    CHECK_THROWS_AS(numerator(kb, paper_clustering(kb), all4, o), CapExceeded);
  }
}

TEST_CASE("evidence_probability") {
  auto tk = tiny2();
  CHECK(evidence_probability(tk, make_case(tk, {"s1"}, {})) == Approx(0.202).epsilon(1e-14));
  CHECK(evidence_probability(tk, make_case(tk, {}, {"s1"})) == Approx(0.798).epsilon(1e-14));
  CHECK(evidence_probability(tk, make_case(tk, {}, {})) == 1.0);

  auto kb = paperkb_u();
  CHECK(rel_close(evidence_probability(kb, make_case(kb, {"s1", "s2", "s3", "s4"}, {})), kFixtureEvidence, 1e-12));
  CHECK(rel_close(evidence_probability(kb, make_case(kb, {"s1", "s2", "s3", "s4"}, {"s5"})), kFixtureEvidenceNegS5,
                  1e-12));
}

TEST_CASE("clustering_probability") {
  auto tk = tiny2();
  auto one = make_clustering(tk, {{{"s1"}, {"d1", "d2"}}});
  auto r = clustering_probability(tk, one, make_case(tk, {"s1"}, {}));
  CHECK(r.posterior == Approx(1.0).epsilon(1e-14));
  CHECK(r.subset_terms == 2);

  auto kb = paperkb_u();
  auto all4 = make_case(kb, {"s1", "s2", "s3", "s4"}, {});
  auto fixture = clustering_probability(kb, paper_clustering(kb), all4);
  CHECK(rel_close(fixture.posterior, kFixturePosterior, 1e-9));
  CHECK(rel_close(fixture.numerator, kFixtureNumerator, 1e-12));
  CHECK(rel_close(fixture.denominator, kFixtureEvidence, 1e-12));
  CHECK(fixture.subset_terms == 16);
  CHECK_FALSE(fixture.clamped);
  CHECK(std::fabs(fixture.posterior * fixture.denominator - fixture.numerator) <= 1e-12 * fixture.numerator);

  auto neg = clustering_probability(kb, paper_clustering(kb), make_case(kb, {"s1", "s2", "s3", "s4"}, {"s5"}));
  CHECK(rel_close(neg.posterior, kFixturePosteriorNegS5, 1e-9));
  CHECK(rel_close(neg.numerator, kFixtureNumeratorNegS5, 1e-12));

  SUBCASE("invalid clustering is refused") {
    auto partial = make_case(kb, {"s1", "s2", "s3"}, {});
    CHECK_THROWS_AS(clustering_probability(kb, paper_clustering(kb), partial), ValidationError);
  }
}

TEST_CASE("impossible evidence") {
  // x can only be caused by a disorder with prior 0.
  auto kb = parse_kb(R"({"disorders":[{"id":"d","prior":0}],"symptoms":["x"],
      "links":[{"disorder":"d","symptom":"x","strength":0.5}]})");
  auto cs = make_case(kb, {"x"}, {});
  CHECK(evidence_probability(kb, cs) == 0.0);
  CHECK_THROWS_AS(candidate_probability(kb, make_candidate(kb, {"d"}), cs), ImpossibleEvidence);
  CHECK_THROWS_AS(clustering_probability(kb, make_clustering(kb, {{{"x"}, {"d"}}}), cs), ImpossibleEvidence);
}

TEST_CASE("strength one and prior one are handled without dividing by zero") {
  auto kb = parse_kb(R"({"disorders":[{"id":"a","prior":1},{"id":"b","prior":0.3},{"id":"c","prior":0.2}],
      "symptoms":["x","y","z"],
      "links":[{"disorder":"a","symptom":"x","strength":1},{"disorder":"b","symptom":"x","strength":1},
               {"disorder":"b","symptom":"y","strength":0.4},{"disorder":"c","symptom":"y","strength":1},
               {"disorder":"c","symptom":"z","strength":0.7}]})");
  for (auto cs : {make_case(kb, {"x", "y"}, {"z"}), make_case(kb, {"x", "y", "z"}, {}), make_case(kb, {"y"}, {"x"})}) {
    double fast;
    try {
      fast = evidence_probability(kb, cs);
    } catch (const Error&) {
      continue;
    }
    CHECK(fast == Approx(evidence_probability(kb, cs, naive_opts())).epsilon(1e-13));
    CHECK(fast == Approx(oracle::oracle_evidence(kb, cs)).epsilon(1e-12));
    if (cs.positive.empty() || fast <= 1e-9) continue;
    for (const auto& cand : minimal_candidates(kb, cs.positive)) {
      auto r = candidate_probability(kb, cand, cs);
      auto exact = oracle::oracle_posterior(kb, oracle::CandidatePresent{cand}, cs);
      CHECK(r.posterior == Approx(exact).epsilon(1e-12));
    }
    for (const auto& cl : enumerate_clusterings(kb, cs)) {
      auto r = clustering_probability(kb, cl, cs);
      auto exact = oracle::oracle_posterior(kb, oracle::ClusteringCands{cl}, cs);
      CHECK(r.posterior == Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("candidate_probability on tiny2") {
  auto kb = tiny2();
  auto none = make_case(kb, {}, {});
  CHECK(candidate_probability(kb, make_candidate(kb, {"d1", "d2"}), none).posterior == Approx(0.02).epsilon(1e-15));

  auto r1 = candidate_probability(kb, make_candidate(kb, {"d1"}), make_case(kb, {"s1"}, {}));
  CHECK(rel_close(r1.posterior, 0.162 / 0.202, 1e-12));
  CHECK(rel_close(r1.posterior, 0.8019802, 1e-6));

  auto r2 = candidate_probability(kb, make_candidate(kb, {"d1"}), make_case(kb, {"s1"}, {"s2"}));
  CHECK(rel_close(r2.posterior, 0.1458 / 0.1498, 1e-12));
  CHECK(rel_close(r2.posterior, 0.973298, 1e-5));

  auto r3 = candidate_probability(kb, make_candidate(kb, {"d2"}), make_case(kb, {"s2"}, {}));
  CHECK(r3.posterior == Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(candidate_probability(kb, Candidate{kb.no_disorders()}, none), ValidationError);
}

TEST_CASE("prior reduction is exact") {
  SeededStream rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto kb = random_small_kb(rng);
    Candidate c{kb.no_disorders()};
    double expect = 1.0;
    for (std::size_t d = 0; d < kb.num_disorders(); ++d) {
      if (rng.unit() < 0.5 || (d + 1 == kb.num_disorders() && c.disorders.empty())) {
        c.disorders.insert(DisorderId(d));
        expect *= kb.prior(DisorderId(d));
      }
    }
    auto r = candidate_probability(kb, c, make_case(kb, {}, {}));
    CHECK(r.subset_terms == 1);
    CHECK(std::fabs(r.posterior - expect) <= 1e-15);
  }
}

TEST_CASE("peng_reggia_score") {
  auto kb = tiny2();
  CHECK(peng_reggia_score(kb, make_candidate(kb, {"d2"}), symptoms(kb, {"s2"})) == Approx(0.5625).epsilon(1e-15));
  CHECK(peng_reggia_score(kb, make_candidate(kb, {"d1"}), symptoms(kb, {"s2"})) == 0.0);
  CHECK(oracle::oracle_only_conditional(kb, make_candidate(kb, {"d2"}), symptoms(kb, {"s2"})) ==
        Approx(0.036 / 0.0378).epsilon(1e-12));

  auto certain = parse_kb(R"({"disorders":[{"id":"a","prior":1},{"id":"b","prior":0.5}],"symptoms":["x"],
      "links":[{"disorder":"b","symptom":"x","strength":0.5}]})");
  CHECK_THROWS_AS(peng_reggia_score(certain, make_candidate(certain, {"b"}), symptoms(certain, {"x"})),
                  ValidationError);
}

TEST_CASE("rank") {
  auto kb = paperkb_u();
  auto all4 = make_case(kb, {"s1", "s2", "s3", "s4"}, {});
  auto ranked = rank(kb, enumerate_clusterings(kb, all4), all4);
  REQUIRE(ranked.size() == 3);
  CHECK(signature(kb, ranked[0].item) == "s1,s4<-d2,d4|s2,s3<-d1,d3");
  CHECK(signature(kb, ranked[1].item) == "s1,s2,s4<-d2|s3<-d1,d3,d5");
  CHECK(signature(kb, ranked[2].item) == "s1,s3<-d5|s2,s4<-d2");
  CHECK(rel_close(ranked[0].result.posterior, 0.787060620989527, 1e-9));
  CHECK(rel_close(ranked[1].result.posterior, 0.61483359834789419, 1e-9));
  CHECK(rel_close(ranked[2].result.posterior, 0.23029355059830636, 1e-9));

  CHECK(rank(kb, std::vector<Clustering>{}, all4).empty());

  SUBCASE("ties break on signature") {
    // d1,d2 and d2,d3 are symmetric under uniform priors and strengths.
    auto c12 = make_candidate(kb, {"d1", "d2"});
    auto c23 = make_candidate(kb, {"d2", "d3"});
    auto r = rank(kb, std::vector<Candidate>{c23, c12}, all4);
    REQUIRE(r.size() == 2);
    REQUIRE(r[0].result.posterior == r[1].result.posterior);
    CHECK(r[0].item == c12);
  }
  SUBCASE("errors name the failing item") {
    auto bad = make_clustering(kb, {{{"s1", "s2", "s3", "s4"}, {"d2"}}});
    CHECK_THROWS_WITH_AS(rank(kb, std::vector<Clustering>{paper_clustering(kb), bad}, all4),
                         doctest::Contains("item 2"), ValidationError);
  }
  SUBCASE("thread count does not change results") {
    EvalOptions o;
    o.threads = 4;
    auto again = rank(kb, enumerate_clusterings(kb, all4), all4, o);
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(again[i].result.posterior == ranked[i].result.posterior);
  }
}

TEST_CASE("EvalResult JSON") {
  EvalResult r{0.25, 0.5, 0.5, 4, false};
  CHECK(to_json(r) == R"({"numerator":0.25,"denominator":0.5,"posterior":0.5,"subset_terms":4,"clamped":false})");
}

TEST_CASE("Gray-code and naive paths agree; evaluation is deterministic") {
  SyntheticKbSpec spec;
  spec.disorders = 300;
  spec.symptoms = 80;
  spec.density = 0.08;
  spec.seed = 9;
  auto kb = generate_kb(spec);
  Case cs{kb.no_symptoms(), kb.no_symptoms()};
  for (std::uint32_t s = 0; s < 14; ++s) cs.positive.insert(SymptomId(s));
  for (std::uint32_t s = 14; s < 30; ++s) cs.negative.insert(SymptomId(s));

  EvalOptions fast;
  double a = evidence_probability(kb, cs, fast);
  double b = evidence_probability(kb, cs, naive_opts());
  CHECK(std::fabs(a - b) <= 1e-12 * std::fabs(b) + 1e-18);
  CHECK(evidence_probability(kb, cs, fast) == a);

  EvalOptions threaded;
  threaded.threads = 3;
  CHECK(evidence_probability(kb, cs, threaded) == a);

  EvalOptions pairwise;
  pairwise.summation = Summation::pairwise;
  CHECK(std::fabs(evidence_probability(kb, cs, pairwise) - a) <= 1e-12 * std::fabs(a) + 1e-18);
}

TEST_CASE("fault hook perturbs the numerator") {
  auto kb = tiny2();
  auto cs = make_case(kb, {"s1"}, {"s2"});
  EvalOptions faulty;
  faulty.inject_sign_fault = true;
  auto clean = candidate_probability(kb, make_candidate(kb, {"d2"}), cs);
  double bent;
  try {
    bent = candidate_probability(kb, make_candidate(kb, {"d2"}), cs, faulty).posterior;
  } catch (const NumericalError&) {
    bent = -1.0;
  }
  CHECK(bent != Approx(clean.posterior));
}

TEST_CASE("evidence is non-increasing in negative findings when P is empty") {
  SeededStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto kb = random_small_kb(rng);
    Case cs{kb.no_symptoms(), kb.no_symptoms()};
    double prev = evidence_probability(kb, cs);
    CHECK(prev == 1.0);
    for (std::size_t s = 0; s < kb.num_symptoms(); ++s) {
      cs.negative.insert(SymptomId(s));
      double now = evidence_probability(kb, cs);
      CHECK(now <= prev);
      prev = now;
    }
  }
}

TEST_CASE("singleton differentials collapse to the single-candidate formula") {
  SeededStream rng(99);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 50; ++trial) {
    auto kb = random_small_kb(rng);
    auto cs = random_case(kb, rng, 4, 3);
    if (cs.positive.empty()) continue;
    try {
      for (const auto& cl : enumerate_clusterings(kb, cs)) {
        bool singletons = std::all_of(cl.tasks.begin(), cl.tasks.end(),
                                      [](const Task& t) { return t.differential.size() == 1; });
        if (!singletons) continue;
        auto a = clustering_probability(kb, cl, cs);
        auto b = candidate_probability(kb, cands(cl).front(), cs);
        CHECK(std::fabs(a.posterior - b.posterior) <= 1e-12);
        ++checked;
      }
    } catch (const ImpossibleEvidence&) {
    }
  }
  CHECK(checked >= 50);
}
