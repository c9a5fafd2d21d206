#include "symclust/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "symclust/covergen.hpp"

namespace symclust::bench {

namespace {

// Keeps the task list valid while findings are appended one at a time.
class GreedyClusterer {
 public:
  explicit GreedyClusterer(const KnowledgeBase& kb) : kb_(kb) {}

  bool try_add(SymptomId s) {
    auto causes = causes_of(kb_, s);
    if (causes.empty()) return false;
    for (auto& t : tasks_) {
      auto narrowed = t.differential & causes;
      if (!narrowed.empty()) {
        t.cluster.insert(s);
        t.differential = std::move(narrowed);
        return true;
      }
    }
    for (const auto& t : tasks_) {
      if (t.differential.intersects(causes)) return false;
    }
    Task fresh{kb_.no_symptoms(), std::move(causes)};
    fresh.cluster.insert(s);
    tasks_.push_back(std::move(fresh));
    return true;
  }

  Clustering snapshot() const { return Clustering{tasks_}; }

 private:
  const KnowledgeBase& kb_;
  std::vector<Task> tasks_;
};

}  // namespace

Case Workload::make_case(std::size_t num_positive, std::size_t num_negative) const {
  Case c{kb.no_symptoms(), kb.no_symptoms()};
  for (std::size_t i = 0; i < num_positive; ++i) c.positive.insert(positives.at(i));
  for (std::size_t i = 0; i < num_negative; ++i) c.negative.insert(negatives.at(i));
  return c;
}

Workload make_workload(const SyntheticKbSpec& spec, std::size_t max_positive, std::size_t max_negative) {
  if (max_positive + max_negative > spec.symptoms) {
    throw ValidationError("need at least " + std::to_string(max_positive + max_negative) +
                          " symptoms for the requested positive and negative findings");
  }
  Workload w{generate_kb(spec), {}, {}, {}};
  const auto& kb = w.kb;

  // Fisher-Yates over symptom ordinals, on its own stream so the KB draws are unaffected.
  SeededStream rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::uint32_t> order(kb.num_symptoms());
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<char> used(order.size(), 0);
  GreedyClusterer greedy(kb);
  w.clusterings.emplace_back(Clustering{});
  for (std::size_t i = 0; i < order.size() && w.positives.size() < max_positive; ++i) {
    SymptomId s(order[i]);
    if (greedy.try_add(s)) {
      used[i] = 1;
      w.positives.push_back(s);
      w.clusterings.emplace_back(greedy.snapshot());
    }
  }
  for (std::size_t i = 0; i < order.size() && w.positives.size() < max_positive; ++i) {
    SymptomId s(order[i]);
    if (used[i] || causes_of(kb, s).empty()) continue;
    used[i] = 1;
    w.positives.push_back(s);
    w.clusterings.emplace_back(std::nullopt);
  }
  if (w.positives.size() < max_positive) {
    throw ValidationError("synthetic KB has too few symptoms with causes for " + std::to_string(max_positive) +
                          " positive findings");
  }
  for (std::size_t i = 0; i < order.size() && w.negatives.size() < max_negative; ++i) {
    if (!used[i]) w.negatives.push_back(SymptomId(order[i]));
  }
  if (w.negatives.size() < max_negative) throw ValidationError("not enough symptoms left for negative findings");
  return w;
}

std::optional<Point> measure(const Workload& w, Op op, std::size_t num_positive, std::size_t num_negative,
                             const EvalOptions& opts, double min_seconds) {
  Case cs = w.make_case(num_positive, num_negative);
  const Clustering* clustering = nullptr;
  if (op == Op::clustering) {
    if (num_positive == 0 || !w.clusterings.at(num_positive)) return std::nullopt;
    clustering = &*w.clusterings[num_positive];
  }

  volatile double sink = 0.0;
  auto once = [&] {
    if (op == Op::evidence) {
      sink = evidence_probability(w.kb, cs, opts);
    } else {
      sink = numerator(w.kb, *clustering, cs, opts) / evidence_probability(w.kb, cs, opts);
    }
  };
  using clock = std::chrono::steady_clock;
  auto elapsed = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  auto t0 = clock::now();
  once();
  double first = std::max(elapsed(t0, clock::now()), 1e-9);
  std::size_t reps = std::max<std::size_t>(1, static_cast<std::size_t>(min_seconds / first));

  double best = first;
  for (int batch = 0; batch < 3; ++batch) {
    auto start = clock::now();
    for (std::size_t r = 0; r < reps; ++r) once();
    best = std::min(best, elapsed(start, clock::now()) / static_cast<double>(reps));
  }
  (void)sink;
  return Point{op,
               opts.naive,
               w.kb.num_disorders(),
               w.kb.num_symptoms(),
               num_positive,
               num_negative,
               std::uint64_t{1} << num_positive,
               reps,
               best};
}

const char* op_name(Op op) { return op == Op::evidence ? "evidence" : "clustering"; }

std::string tsv_header() { return "op\tmode\tdisorders\tsymptoms\tpositives\tnegatives\tsubset_terms\treps\tseconds"; }

std::string to_tsv(const Point& p) {
  char secs[64];
  std::snprintf(secs, sizeof secs, "%.6e", p.seconds);
  return std::string(op_name(p.op)) + '\t' + (p.naive ? "naive" : "gray") + '\t' + std::to_string(p.disorders) +
         '\t' + std::to_string(p.symptoms) + '\t' + std::to_string(p.positives) + '\t' +
         std::to_string(p.negatives) + '\t' + std::to_string(p.subset_terms) + '\t' + std::to_string(p.reps) +
         '\t' + secs;
}

}  // namespace symclust::bench
