#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "symclust/model.hpp"

namespace symclust {

/// Default limit on |P| for partition enumeration (Bell(10) = 115975).
inline constexpr std::size_t kDefaultPartitionCap = 10;

/// Disorders able to cause every symptom in `cluster` (intersection of
/// Causes-of sets). May be empty.
DisorderSet differential(const KnowledgeBase& kb, const SymptomSet& cluster);

/// Visits the set partitions of `n` items in restricted-growth-string order.
/// The callback receives the block label of each item; labels are 0-based
/// and the first occurrence of each label is in increasing order.
void for_each_set_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& visit);

/// One clustering per set partition of P whose blocks all have non-empty,
/// pairwise-disjoint differentials. Partition order is restricted-growth order.
std::vector<Clustering> enumerate_clusterings(const KnowledgeBase& kb, const Case& cs,
                                              std::size_t partition_cap = kDefaultPartitionCap);

/// Cartesian product of the differentials, first task most significant.
std::vector<Candidate> cands(const Clustering& c);

/// Number of candidates the clustering entails.
std::size_t cands_count(const Clustering& c);

bool is_candidate(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p);

/// Requires is_candidate(kb, cand, p); throws ValidationError otherwise.
bool is_minimal(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p);

/// Every minimal cover of p, ordered by size then by ascending ordinals.
/// Brute force over subsets of the union of causes; at most 2^20 subsets.
std::vector<Candidate> minimal_candidates(const KnowledgeBase& kb, const SymptomSet& p,
                                          std::size_t partition_cap = kDefaultPartitionCap);

/// Order used for deterministic output: size first, then lexicographic ordinals.
bool candidate_less(const Candidate& a, const Candidate& b);

}  // namespace symclust
