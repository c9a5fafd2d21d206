#include "symclust/covergen.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

namespace symclust {

namespace {

void check_cap(std::size_t size, std::size_t cap, const char* what) {
  if (size > cap) {
    throw CapExceeded(std::string(what) + ": " + std::to_string(size) + " positive findings exceed the cap of " +
                      std::to_string(cap));
  }
}

// Restricted-growth DFS over items, keeping each open block's running
// differential so that a block whose differential empties prunes its subtree.
class ClusteringSearch {
 public:
  ClusteringSearch(const KnowledgeBase& kb, std::vector<SymptomId> items)
      : kb_(kb), items_(std::move(items)) {
    causes_.reserve(items_.size());
    for (auto s : items_) causes_.push_back(causes_of(kb_, s));
  }

  std::vector<Clustering> run() {
    blocks_.clear();
    recurse(0);
    return std::move(out_);
  }

 private:
  struct Block {
    SymptomSet cluster;
    DisorderSet differential;
  };

  void recurse(std::size_t i) {
    if (i == items_.size()) {
      emit();
      return;
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      DisorderSet narrowed = blocks_[b].differential & causes_[i];
      if (narrowed.empty()) continue;
      Block saved = blocks_[b];
      blocks_[b].cluster.insert(items_[i]);
      blocks_[b].differential = std::move(narrowed);
      recurse(i + 1);
      blocks_[b] = std::move(saved);
    }
    if (causes_[i].empty()) return;
    Block fresh{kb_.no_symptoms(), causes_[i]};
    fresh.cluster.insert(items_[i]);
    blocks_.push_back(std::move(fresh));
    recurse(i + 1);
    blocks_.pop_back();
  }

  void emit() {
    for (std::size_t a = 0; a < blocks_.size(); ++a) {
      for (std::size_t b = a + 1; b < blocks_.size(); ++b) {
        if (blocks_[a].differential.intersects(blocks_[b].differential)) return;
      }
    }
    Clustering c;
    c.tasks.reserve(blocks_.size());
    for (const auto& blk : blocks_) c.tasks.push_back({blk.cluster, blk.differential});
    out_.push_back(std::move(c));
  }

  const KnowledgeBase& kb_;
  std::vector<SymptomId> items_;
  std::vector<DisorderSet> causes_;
  std::vector<Block> blocks_;
  std::vector<Clustering> out_;
};

}  // namespace

DisorderSet differential(const KnowledgeBase& kb, const SymptomSet& cluster) {
  if (cluster.universe() != kb.num_symptoms()) throw ValidationError("cluster built against a different knowledge base");
  if (cluster.empty()) throw ValidationError("differential of an empty cluster");
  DisorderSet out = kb.all_disorders();
  cluster.for_each([&](SymptomId s) { out &= causes_of(kb, s); });
  return out;
}

void for_each_set_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> labels(n, 0);
  if (n == 0) {
    visit(labels);
    return;
  }
  // max_prefix[i] = largest label among labels[0..i]
  std::vector<int> max_prefix(n, 0);
  while (true) {
    visit(labels);
    std::size_t i = n - 1;
    while (i > 0 && labels[i] == max_prefix[i - 1] + 1) --i;
    if (i == 0) return;
    ++labels[i];
    max_prefix[i] = std::max(max_prefix[i - 1], labels[i]);
    for (std::size_t k = i + 1; k < n; ++k) {
      labels[k] = 0;
      max_prefix[k] = max_prefix[i];
    }
  }
}

std::vector<Clustering> enumerate_clusterings(const KnowledgeBase& kb, const Case& cs, std::size_t partition_cap) {
  if (cs.positive.empty()) throw ValidationError("cannot cluster an empty set of positive findings");
  check_cap(cs.positive.size(), partition_cap, "clustering enumeration");
  return ClusteringSearch(kb, cs.positive.members()).run();
}

std::size_t cands_count(const Clustering& c) {
  std::size_t n = 1;
  for (const auto& t : c.tasks) n *= t.differential.size();
  return n;
}

std::vector<Candidate> cands(const Clustering& c) {
  std::vector<Candidate> out;
  if (c.tasks.empty()) return out;
  std::vector<std::vector<DisorderId>> choices;
  for (const auto& t : c.tasks) {
    choices.push_back(t.differential.members());
    if (choices.back().empty()) return out;
  }
  const std::size_t universe = c.tasks.front().differential.universe();
  out.reserve(cands_count(c));
  std::vector<std::size_t> odometer(choices.size(), 0);
  while (true) {
    Candidate cand{DisorderSet(universe)};
    for (std::size_t i = 0; i < choices.size(); ++i) cand.disorders.insert(choices[i][odometer[i]]);
    out.push_back(std::move(cand));
    std::size_t i = choices.size();
    while (i > 0) {
      --i;
      if (++odometer[i] < choices[i].size()) break;
      odometer[i] = 0;
      if (i == 0) return out;
    }
  }
}

bool is_candidate(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p) {
  cand.disorders.for_each([&](DisorderId d) { kb.check(d); });
  p.for_each([&](SymptomId s) { kb.check(s); });
  SymptomSet covered = kb.no_symptoms();
  cand.disorders.for_each([&](DisorderId d) { covered |= effects_of(kb, d); });
  return p.is_subset_of(covered);
}

bool is_minimal(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p) {
  if (!is_candidate(kb, cand, p)) {
    throw ValidationError("is_minimal: {" + format_set(kb, cand.disorders) + "} is not a candidate for {" +
                          format_set(kb, p) + "}");
  }
  bool minimal = true;
  cand.disorders.for_each([&](DisorderId d) {
    if (!minimal) return;
    Candidate reduced = cand;
    reduced.disorders.erase(d);
    if (is_candidate(kb, reduced, p)) minimal = false;
  });
  return minimal;
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  auto sa = a.disorders.size();
  auto sb = b.disorders.size();
  if (sa != sb) return sa < sb;
  return a.disorders < b.disorders;
}

std::vector<Candidate> minimal_candidates(const KnowledgeBase& kb, const SymptomSet& p, std::size_t partition_cap) {
  std::vector<Candidate> out;
  if (p.empty()) return out;
  check_cap(p.size(), partition_cap, "minimal candidates");
  if (p.size() > 64) throw CapExceeded("minimal candidates: more than 64 findings");

  auto findings = p.members();
  DisorderSet pool = kb.no_disorders();
  for (auto s : findings) {
    auto c = causes_of(kb, s);
    if (c.empty()) throw ValidationError("positive finding '" + kb.name(s) + "' has no cause in the knowledge base");
    pool |= c;
  }
  auto disorders = pool.members();
  if (disorders.size() > 20) {
    throw CapExceeded("minimal candidates: " + std::to_string(disorders.size()) +
                      " distinct causes exceed the 2^20 subset bound");
  }

  // cover[i] = bitmask over findings explained by disorders[i]
  std::vector<std::uint64_t> cover(disorders.size(), 0);
  for (std::size_t i = 0; i < disorders.size(); ++i) {
    for (std::size_t k = 0; k < findings.size(); ++k) {
      if (kb.strength(disorders[i], findings[k]) > 0.0) cover[i] |= std::uint64_t{1} << k;
    }
  }
  const std::uint64_t all = findings.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << findings.size()) - 1;
  const std::uint32_t n = static_cast<std::uint32_t>(disorders.size());
  const std::uint32_t subsets = std::uint32_t{1} << n;

  std::vector<bool> covers(subsets, false);
  // covered[m] = covered[m without its lowest bit] | cover[lowest bit]
  std::vector<std::uint64_t> covered(subsets, 0);
  for (std::uint32_t m = 1; m < subsets; ++m) {
    auto low = static_cast<std::uint32_t>(std::countr_zero(m));
    covered[m] = covered[m & (m - 1)] | cover[low];
    covers[m] = covered[m] == all;
  }
  for (std::uint32_t m = 1; m < subsets; ++m) {
    if (!covers[m]) continue;
    bool minimal = true;
    for (std::uint32_t rest = m; rest && minimal; rest &= rest - 1) {
      std::uint32_t bit = rest & (~rest + 1);
      if (covers[m ^ bit]) minimal = false;
    }
    if (!minimal) continue;
    Candidate c{kb.no_disorders()};
    for (std::uint32_t i = 0; i < n; ++i) {
      if (m & (std::uint32_t{1} << i)) c.disorders.insert(disorders[i]);
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), candidate_less);
  return out;
}

}  // namespace symclust
