#pragma once

#include <cstddef>
#include <variant>

#include "symclust/model.hpp"

namespace symclust::oracle {

// Brute-force verifier. Sums over every presence/absence assignment of the
// knowledge base's disorders under the leak-free noisy-OR model. Shares no
// code with the inclusion-exclusion engine.

inline constexpr std::size_t kMaxDisorders = 20;

/// A full truth assignment: listed disorders present, the rest absent.
struct Interpretation {
  DisorderSet present;
};

/// Every disorder of the candidate is present (others unconstrained).
struct CandidatePresent {
  Candidate candidate;
};
/// Each differential of the clustering has a present member.
struct ClusteringCands {
  Clustering clustering;
};
/// Exactly the candidate's disorders are present.
struct OnlyCandidate {
  Candidate candidate;
};

using Event = std::variant<CandidatePresent, ClusteringCands, OnlyCandidate>;

double state_prior(const KnowledgeBase& kb, const Interpretation& i);
double case_likelihood(const KnowledgeBase& kb, const Interpretation& i, const Case& cs);
bool event_holds(const KnowledgeBase& kb, const Interpretation& i, const Event& e);

/// p(P+ N-) by enumeration. Throws CapExceeded above kMaxDisorders.
double oracle_evidence(const KnowledgeBase& kb, const Case& cs);

struct Enumerated {
  double joint = 0.0;     ///< p(event, P+ N-)
  double evidence = 0.0;  ///< p(P+ N-)
  double posterior = 0.0;
};

/// Joint, evidence and conditional for one event. Throws ImpossibleEvidence
/// when the evidence sums to zero.
Enumerated oracle_enumerate(const KnowledgeBase& kb, const Event& e, const Case& cs);
double oracle_posterior(const KnowledgeBase& kb, const Event& e, const Case& cs);

/// p(only C present | only P present): every symptom outside P is observed absent.
double oracle_only_conditional(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p);

/// Relative disagreement |engine - exact| / |exact|; 0 when both are 0.
double relative_error(double engine, double exact);

}  // namespace symclust::oracle
