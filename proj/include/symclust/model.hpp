#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "symclust/errors.hpp"
#include "symclust/ids.hpp"

namespace symclust {

/// Bipartite causal knowledge base: disorders with priors, symptoms, and
/// noisy-OR causal strengths. Immutable once built.
///
/// A strength is stored only when strictly positive; an unlisted pair has
/// strength exactly 0.
class KnowledgeBase {
 public:
  struct Link {
    std::string disorder;
    std::string symptom;
    double strength;
  };

  KnowledgeBase() = default;

  /// Builds and validates a knowledge base. Ordinals follow input order.
  /// Throws ValidationError on duplicate/unknown ids, out-of-range values,
  /// or an explicit zero strength.
  KnowledgeBase(std::vector<std::pair<std::string, double>> disorders,
                std::vector<std::string> symptoms, const std::vector<Link>& links);

  std::size_t num_disorders() const { return disorder_names_.size(); }
  std::size_t num_symptoms() const { return symptom_names_.size(); }
  std::size_t num_links() const { return static_cast<std::size_t>(effects_.nonZeros()); }

  const std::string& name(DisorderId d) const { return disorder_names_.at(d.index); }
  const std::string& name(SymptomId s) const { return symptom_names_.at(s.index); }

  /// Throws ValidationError naming the token when it is not a declared id of that kind.
  DisorderId disorder(std::string_view name) const;
  SymptomId symptom(std::string_view name) const;
  bool has_disorder(std::string_view name) const;
  bool has_symptom(std::string_view name) const;

  double prior(DisorderId d) const { return priors_[d.index]; }
  double prior_absent(DisorderId d) const { return 1.0 - priors_[d.index]; }
  const Eigen::VectorXd& priors() const { return priors_; }

  /// c_ds; exactly 0 for an unlisted pair.
  double strength(DisorderId d, SymptomId s) const { return effects_.coeff(d.index, s.index); }

  /// Row-major (disorder x symptom) and column-major views of the same strengths.
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& effects_matrix() const { return effects_; }
  const Eigen::SparseMatrix<double, Eigen::ColMajor>& causes_matrix() const { return causes_; }

  DisorderSet all_disorders() const { return DisorderSet(num_disorders()).complement(); }
  SymptomSet all_symptoms() const { return SymptomSet(num_symptoms()).complement(); }
  DisorderSet no_disorders() const { return DisorderSet(num_disorders()); }
  SymptomSet no_symptoms() const { return SymptomSet(num_symptoms()); }

  void check(DisorderId d) const;
  void check(SymptomId s) const;

 private:
  std::vector<std::string> disorder_names_;
  std::vector<std::string> symptom_names_;
  std::unordered_map<std::string, std::uint32_t> disorder_index_;
  std::unordered_map<std::string, std::uint32_t> symptom_index_;
  Eigen::VectorXd priors_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> effects_;
  Eigen::SparseMatrix<double, Eigen::ColMajor> causes_;
};

/// Observed findings. Symptoms in neither set are unknown.
struct Case {
  SymptomSet positive;
  SymptomSet negative;
};

/// Disorders hypothesized jointly present. Never empty.
struct Candidate {
  DisorderSet disorders;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// A problem area: every symptom in `cluster` is caused by some disorder in `differential`.
struct Task {
  SymptomSet cluster;
  DisorderSet differential;

  friend bool operator==(const Task&, const Task&) = default;
};

/// Ordered tasks whose clusters partition the positive findings.
struct Clustering {
  std::vector<Task> tasks;

  /// Disorders in no differential.
  DisorderSet residual(const KnowledgeBase& kb) const;

  friend bool operator==(const Clustering&, const Clustering&) = default;
};

Case make_case(const KnowledgeBase& kb, const std::vector<std::string>& positive,
               const std::vector<std::string>& negative);
Candidate make_candidate(const KnowledgeBase& kb, const std::vector<std::string>& disorders);
Clustering make_clustering(
    const KnowledgeBase& kb,
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& tasks);

// File formats (JSON). Unknown keys are rejected.
KnowledgeBase parse_kb(std::string_view text);
Case parse_case(std::string_view text, const KnowledgeBase& kb);
Clustering parse_clustering(std::string_view text, const KnowledgeBase& kb);

std::string serialize_kb(const KnowledgeBase& kb);
std::string serialize_case(const KnowledgeBase& kb, const Case& c);
std::string serialize_clustering(const KnowledgeBase& kb, const Clustering& c);

DisorderSet causes_of(const KnowledgeBase& kb, SymptomId s);
SymptomSet effects_of(const KnowledgeBase& kb, DisorderId d);

struct ValidateOptions {
  /// Report differential overlap as a warning instead of a violation.
  bool permissive = false;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

/// Checks every task and clustering invariant; collects all violations.
ValidationReport validate_clustering(const KnowledgeBase& kb, const Clustering& c, const Case& cs,
                                     ValidateOptions opts = {});

/// Strict validation; throws ValidationError listing every violation.
void require_valid(const KnowledgeBase& kb, const Clustering& c, const Case& cs);

std::string format_set(const KnowledgeBase& kb, const DisorderSet& s);
std::string format_set(const KnowledgeBase& kb, const SymptomSet& s);

}  // namespace symclust
