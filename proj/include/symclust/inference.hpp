#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "symclust/model.hpp"

namespace symclust {

/// Symptoms taken as absent in one inclusion-exclusion term: a subset of
/// the positive findings together with all negative findings.
struct AbsenceSet {
  SymptomSet symptoms;
};

enum class Summation { pairwise, compensated };

struct EvalOptions {
  /// Largest |P| accepted; evaluation costs 2^|P| terms.
  std::size_t max_positive = 20;
  /// Width of the window beyond [0,1] that is clamped rather than rejected.
  double clamp_epsilon = 1e-9;
  Summation summation = Summation::compensated;
  /// Recompute every term from scratch through the per-term operations
  /// instead of the incremental Gray-code walk.
  bool naive = false;
  /// Worker threads for splitting the subset space. Results do not depend on it.
  std::size_t threads = 1;
  /// Test hook: negates the last inclusion-exclusion term of every numerator.
  bool inject_sign_fault = false;
};

struct EvalResult {
  double numerator = 0.0;
  double denominator = 0.0;
  double posterior = 0.0;
  std::uint64_t subset_terms = 0;
  bool clamped = false;
};

/// p(d+) * prod_{s in N'} (1 - c_ds) + p(d-): probability that d causes nothing in N'.
double failure_factor(const KnowledgeBase& kb, DisorderId d, const AbsenceSet& nprime);

/// Probability that no disorder of `diff` causes anything in N' while at
/// least one of them is present.
double differential_term(const KnowledgeBase& kb, const DisorderSet& diff, const AbsenceSet& nprime);

/// Probability that no disorder of `dstar` causes anything in N'.
double residual_term(const KnowledgeBase& kb, const DisorderSet& dstar, const AbsenceSet& nprime);

/// p(N' all absent, some candidate of the clustering present). Validates the
/// clustering's structure (not its relation to a case).
double joint_absent_and_cands(const KnowledgeBase& kb, const Clustering& c, const AbsenceSet& nprime);

/// p(N' all absent, every disorder of the candidate present).
double joint_absent_and_candidate(const KnowledgeBase& kb, const Candidate& cand, const AbsenceSet& nprime);

/// p(P+ N- Cands(C)) by inclusion-exclusion over subsets of P. Raw value; may
/// dip below zero by at most clamp_epsilon.
double numerator(const KnowledgeBase& kb, const Clustering& c, const Case& cs, const EvalOptions& opts = {});

/// p(P+ N-), the marginal probability of the findings. Raw value.
double evidence_probability(const KnowledgeBase& kb, const Case& cs, const EvalOptions& opts = {});

/// Posterior that some candidate entailed by `c` is present.
EvalResult clustering_probability(const KnowledgeBase& kb, const Clustering& c, const Case& cs,
                                  const EvalOptions& opts = {});

/// Posterior that every disorder of `cand` is present; other disorders unconstrained.
EvalResult candidate_probability(const KnowledgeBase& kb, const Candidate& cand, const Case& cs,
                                 const EvalOptions& opts = {});

/// The "only C present given only P present" score in its usual closed
/// form. Not a normalized conditional probability.
double peng_reggia_score(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p);

template <typename Item>
struct Ranked {
  Item item;
  EvalResult result;
};

/// Evaluates and orders items by posterior, descending; ties go to the
/// lexicographically smaller signature.
std::vector<Ranked<Clustering>> rank(const KnowledgeBase& kb, const std::vector<Clustering>& items, const Case& cs,
                                     const EvalOptions& opts = {});
std::vector<Ranked<Candidate>> rank(const KnowledgeBase& kb, const std::vector<Candidate>& items, const Case& cs,
                                    const EvalOptions& opts = {});

/// Printable item signatures, e.g. "d1,d2" and "s1,s4<-d2,d4|s2,s3<-d1,d3".
std::string signature(const KnowledgeBase& kb, const Candidate& cand);
std::string signature(const KnowledgeBase& kb, const Clustering& c);

/// {"numerator": n, "denominator": d, "posterior": p, "subset_terms": t, "clamped": b}
std::string to_json(const EvalResult& r);

}  // namespace symclust
