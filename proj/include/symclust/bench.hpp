#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symclust/inference.hpp"
#include "symclust/synthetic.hpp"

namespace symclust::bench {

enum class Op { evidence, clustering };

struct Workload {
  KnowledgeBase kb;
  /// Positive findings in selection order; prefixes of length k form the |P| = k cases.
  std::vector<SymptomId> positives;
  /// For each prefix length k (index k), a valid clustering of that prefix
  /// when the greedy builder found one.
  std::vector<std::optional<Clustering>> clusterings;
  /// Candidate negative findings in selection order, disjoint from positives.
  std::vector<SymptomId> negatives;

  Case make_case(std::size_t num_positive, std::size_t num_negative) const;
};

/// Generates the KB and picks findings. Positives are drawn from a seeded
/// shuffle of the symptoms, keeping those that leave a valid greedy
/// clustering (a finding joins the first task whose differential it shares
/// a cause with, otherwise opens a task when its causes avoid every other
/// differential). Symptoms that fit nowhere are skipped until none remain,
/// after which the remaining positives are filled from any symptom with a cause.
Workload make_workload(const SyntheticKbSpec& spec, std::size_t max_positive, std::size_t max_negative);

struct Point {
  Op op;
  bool naive;
  std::size_t disorders;
  std::size_t symptoms;
  std::size_t positives;
  std::size_t negatives;
  std::uint64_t subset_terms;
  std::size_t reps;
  double seconds;  ///< wall time per evaluation (best batch mean)
};

/// Times one evaluation repeatedly: enough repetitions to fill `min_seconds`
/// per batch, three batches, best batch mean reported.
std::optional<Point> measure(const Workload& w, Op op, std::size_t num_positive, std::size_t num_negative,
                             const EvalOptions& opts, double min_seconds);

std::string tsv_header();
std::string to_tsv(const Point& p);
const char* op_name(Op op);

}  // namespace symclust::bench
