#include "symclust/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace symclust::oracle {

namespace {

void check_size(const KnowledgeBase& kb) {
  if (kb.num_disorders() > kMaxDisorders) {
    throw CapExceeded("oracle enumeration needs |D_K| <= " + std::to_string(kMaxDisorders) + ", got " +
                      std::to_string(kb.num_disorders()));
  }
}

Interpretation from_mask(const KnowledgeBase& kb, std::uint32_t mask) {
  Interpretation i{kb.no_disorders()};
  for (std::uint32_t d = 0; d < kb.num_disorders(); ++d) {
    if (mask & (std::uint32_t{1} << d)) i.present.insert(DisorderId(d));
  }
  return i;
}

double symptom_stays_off(const KnowledgeBase& kb, const Interpretation& i, SymptomId s) {
  double off = 1.0;
  i.present.for_each([&](DisorderId d) { off *= 1.0 - kb.strength(d, s); });
  return off;
}

}  // namespace

double state_prior(const KnowledgeBase& kb, const Interpretation& i) {
  double p = 1.0;
  for (std::size_t k = 0; k < kb.num_disorders(); ++k) {
    DisorderId d(k);
    p *= i.present.contains(d) ? kb.prior(d) : 1.0 - kb.prior(d);
  }
  return p;
}

double case_likelihood(const KnowledgeBase& kb, const Interpretation& i, const Case& cs) {
  double l = 1.0;
  cs.positive.for_each([&](SymptomId s) { l *= 1.0 - symptom_stays_off(kb, i, s); });
  cs.negative.for_each([&](SymptomId s) { l *= symptom_stays_off(kb, i, s); });
  return l;
}

bool event_holds(const KnowledgeBase&, const Interpretation& i, const Event& e) {
  struct Visitor {
    const Interpretation& i;
    bool operator()(const CandidatePresent& c) const { return c.candidate.disorders.is_subset_of(i.present); }
    bool operator()(const ClusteringCands& c) const {
      for (const auto& t : c.clustering.tasks) {
        if (!t.differential.intersects(i.present)) return false;
      }
      return true;
    }
    bool operator()(const OnlyCandidate& c) const { return c.candidate.disorders == i.present; }
  };
  return std::visit(Visitor{i}, e);
}

double oracle_evidence(const KnowledgeBase& kb, const Case& cs) {
  check_size(kb);
  double total = 0.0;
  const std::uint32_t states = std::uint32_t{1} << kb.num_disorders();
  for (std::uint32_t m = 0; m < states; ++m) {
    auto i = from_mask(kb, m);
    total += state_prior(kb, i) * case_likelihood(kb, i, cs);
  }
  return total;
}

Enumerated oracle_enumerate(const KnowledgeBase& kb, const Event& e, const Case& cs) {
  check_size(kb);
  Enumerated out;
  const std::uint32_t states = std::uint32_t{1} << kb.num_disorders();
  for (std::uint32_t m = 0; m < states; ++m) {
    auto i = from_mask(kb, m);
    double w = state_prior(kb, i) * case_likelihood(kb, i, cs);
    out.evidence += w;
    if (event_holds(kb, i, e)) out.joint += w;
  }
  if (out.evidence <= 0.0) throw ImpossibleEvidence("oracle: findings have probability zero");
  out.posterior = out.joint / out.evidence;
  return out;
}

double oracle_posterior(const KnowledgeBase& kb, const Event& e, const Case& cs) {
  return oracle_enumerate(kb, e, cs).posterior;
}

double oracle_only_conditional(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p) {
  Case only{p, kb.all_symptoms() - p};
  return oracle_posterior(kb, OnlyCandidate{cand}, only);
}

double relative_error(double engine, double exact) {
  if (engine == exact) return 0.0;
  if (exact == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(engine - exact) / std::fabs(exact);
}

}  // namespace symclust::oracle
