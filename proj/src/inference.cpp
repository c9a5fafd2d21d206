#include "symclust/inference.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include <json.hpp>

#include "subset_sum.hpp"

namespace symclust {

namespace {

using detail::gray;

void check_universe(const KnowledgeBase& kb, const SymptomSet& s, const char* what) {
  if (s.universe() != kb.num_symptoms()) {
    throw ValidationError(std::string(what) + " was built against a different knowledge base");
  }
}

void check_universe(const KnowledgeBase& kb, const DisorderSet& s, const char* what) {
  if (s.universe() != kb.num_disorders()) {
    throw ValidationError(std::string(what) + " was built against a different knowledge base");
  }
}

void check_case(const KnowledgeBase& kb, const Case& cs, const EvalOptions& opts) {
  check_universe(kb, cs.positive, "case");
  check_universe(kb, cs.negative, "case");
  if (cs.positive.intersects(cs.negative)) {
    throw ValidationError("case lists " + format_set(kb, cs.positive & cs.negative) + " as both positive and negative");
  }
  const std::size_t limit = std::min<std::size_t>(opts.max_positive, 62);
  if (cs.positive.size() > limit) {
    throw CapExceeded(std::to_string(cs.positive.size()) + " positive findings exceed max_positive = " +
                      std::to_string(limit) + " (evaluation costs 2^|P| terms)");
  }
}

void check_candidate(const KnowledgeBase& kb, const Candidate& cand) {
  check_universe(kb, cand.disorders, "candidate");
  if (cand.disorders.empty()) throw ValidationError("a candidate needs at least one disorder");
}

/// Per-disorder factor a_d * q_d + b_d, where q_d = prod_{s in N'} (1 - c_ds),
/// grouped; each term of the alternating sum is prod_g (prod_{d in g} factor_d - subtract_g).
/// Covers the evidence (one group), a clustering (one group per differential plus
/// the residual) and a single candidate (one group, b_d = 0 on candidate members).
struct FactorModel {
  std::vector<double> present_weight;
  std::vector<double> absent_weight;
  std::vector<std::uint32_t> group;
  std::vector<double> subtract;
};

FactorModel evidence_model(const KnowledgeBase& kb) {
  const auto n = kb.num_disorders();
  FactorModel m;
  m.present_weight.resize(n);
  m.absent_weight.resize(n);
  m.group.assign(n, 0);
  m.subtract = {0.0};
  for (std::size_t i = 0; i < n; ++i) {
    m.present_weight[i] = kb.prior(DisorderId(i));
    m.absent_weight[i] = kb.prior_absent(DisorderId(i));
  }
  return m;
}

FactorModel clustering_model(const KnowledgeBase& kb, const Clustering& c) {
  FactorModel m = evidence_model(kb);
  const auto residual = static_cast<std::uint32_t>(c.tasks.size());
  m.group.assign(kb.num_disorders(), residual);
  m.subtract.assign(c.tasks.size() + 1, 0.0);
  for (std::uint32_t i = 0; i < c.tasks.size(); ++i) {
    double all_absent = 1.0;
    c.tasks[i].differential.for_each([&](DisorderId d) {
      m.group[d.index] = i;
      all_absent *= kb.prior_absent(d);
    });
    m.subtract[i] = all_absent;
  }
  return m;
}

FactorModel candidate_model(const KnowledgeBase& kb, const Candidate& cand) {
  FactorModel m = evidence_model(kb);
  cand.disorders.for_each([&](DisorderId d) { m.absent_weight[d.index] = 0.0; });
  return m;
}

/// Incremental evaluation of a FactorModel's alternating sum. Subsets of P
/// are visited in Gray-code order; each step toggles one positive finding in
/// or out of N' and updates only the disorders that can cause it. Zero
/// factors are counted separately so nothing is ever divided by zero.
class GrayEngine {
 public:
  GrayEngine(const KnowledgeBase& kb, const FactorModel& model, const Case& cs)
      : subtract_(model.subtract), group_const_(model.subtract.size(), 1.0) {
    const auto n = kb.num_disorders();
    const auto& causes = kb.causes_matrix();
    auto positives = cs.positive.members();
    auto negatives = cs.negative.members();
    m_ = positives.size();

    std::vector<char> touched(n, 0);
    auto mark = [&](SymptomId s) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(causes, s.index); it; ++it) touched[it.row()] = 1;
    };
    for (auto s : positives) mark(s);
    for (auto s : negatives) mark(s);

    std::vector<std::int32_t> slot(n, -1);
    for (std::size_t d = 0; d < n; ++d) {
      if (touched[d]) {
        slot[d] = static_cast<std::int32_t>(tracked_.size());
        tracked_.push_back({model.group[d], model.present_weight[d], model.absent_weight[d], 1.0, 0});
      } else {
        group_const_[model.group[d]] *= model.present_weight[d] + model.absent_weight[d];
      }
    }

    for (auto s : negatives) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(causes, s.index); it; ++it) {
        auto& t = tracked_[static_cast<std::size_t>(slot[it.row()])];
        double f = 1.0 - it.value();
        if (f == 0.0) {
          ++t.base_zero;
        } else {
          t.base_nonzero *= f;
        }
      }
    }

    hits_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(causes, positives[j].index); it; ++it) {
        hits_[j].push_back({static_cast<std::uint32_t>(slot[it.row()]), 1.0 - it.value()});
      }
    }
  }

  std::uint64_t terms() const { return std::uint64_t{1} << m_; }

  double sum(const EvalOptions& opts, bool fault) const {
    const std::uint64_t full = terms() - 1;
    return detail::run_blocks(terms(), opts, [&](std::uint64_t first, std::uint64_t last, detail::Accumulator& acc) {
      State st = seed(gray(first));
      std::uint64_t mask = gray(first);
      bool negative = std::popcount(mask) & 1;
      for (std::uint64_t k = first; k < last; ++k) {
        if (k != first) {
          auto j = static_cast<std::size_t>(std::countr_zero(k));
          mask ^= std::uint64_t{1} << j;
          toggle(st, j, (mask >> j) & 1);
          negative = !negative;
        }
        double t = term(st);
        if (negative) t = -t;
        if (fault && mask == full) t = -t;
        acc.add(t);
      }
    });
  }

 private:
  struct Tracked {
    std::uint32_t group;
    double present_weight;
    double absent_weight;
    double base_nonzero;
    int base_zero;
  };

  struct Hit {
    std::uint32_t tracked;
    double fail;
  };

  struct State {
    std::vector<double> q_nonzero;
    std::vector<int> q_zero;
    std::vector<double> factor;
    std::vector<double> g_nonzero;
    std::vector<int> g_zero;
  };

  double factor_of(std::size_t t, double q_nonzero, int q_zero) const {
    double q = q_zero ? 0.0 : q_nonzero;
    return tracked_[t].present_weight * q + tracked_[t].absent_weight;
  }

  State seed(std::uint64_t mask) const {
    State st;
    const auto nt = tracked_.size();
    st.q_nonzero.resize(nt);
    st.q_zero.resize(nt);
    st.factor.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      st.q_nonzero[t] = tracked_[t].base_nonzero;
      st.q_zero[t] = tracked_[t].base_zero;
    }
    for (std::size_t j = 0; j < m_; ++j) {
      if (!((mask >> j) & 1)) continue;
      for (auto [t, f] : hits_[j]) {
        if (f == 0.0) {
          ++st.q_zero[t];
        } else {
          st.q_nonzero[t] *= f;
        }
      }
    }
    st.g_nonzero.assign(subtract_.size(), 1.0);
    st.g_zero.assign(subtract_.size(), 0);
    for (std::size_t t = 0; t < nt; ++t) {
      double f = factor_of(t, st.q_nonzero[t], st.q_zero[t]);
      st.factor[t] = f;
      auto g = tracked_[t].group;
      if (f == 0.0) {
        ++st.g_zero[g];
      } else {
        st.g_nonzero[g] *= f;
      }
    }
    return st;
  }

  void toggle(State& st, std::size_t j, bool entering) const {
    for (auto [t, f] : hits_[j]) {
      if (f == 0.0) {
        st.q_zero[t] += entering ? 1 : -1;
      } else if (entering) {
        st.q_nonzero[t] *= f;
      } else {
        st.q_nonzero[t] /= f;
      }
      double before = st.factor[t];
      double after = factor_of(t, st.q_nonzero[t], st.q_zero[t]);
      st.factor[t] = after;
      auto g = tracked_[t].group;
      if (before == 0.0) {
        --st.g_zero[g];
      } else {
        st.g_nonzero[g] /= before;
      }
      if (after == 0.0) {
        ++st.g_zero[g];
      } else {
        st.g_nonzero[g] *= after;
      }
    }
  }

  double term(const State& st) const {
    double v = 1.0;
    for (std::size_t g = 0; g < subtract_.size(); ++g) {
      double prod = st.g_zero[g] ? 0.0 : group_const_[g] * st.g_nonzero[g];
      v *= prod - subtract_[g];
    }
    return v;
  }

  std::vector<double> subtract_;
  std::vector<double> group_const_;
  std::vector<Tracked> tracked_;
  std::vector<std::vector<Hit>> hits_;
  std::size_t m_ = 0;
};

/// Reference path: each term recomputed from scratch by `term(N')`.
template <typename TermFn>
double naive_sum(const KnowledgeBase& kb, const Case& cs, const EvalOptions& opts, bool fault, TermFn&& term_of) {
  auto positives = cs.positive.members();
  const std::uint64_t total = std::uint64_t{1} << positives.size();
  const std::uint64_t full = total - 1;
  return detail::run_blocks(total, opts, [&](std::uint64_t first, std::uint64_t last, detail::Accumulator& acc) {
    AbsenceSet nprime{kb.no_symptoms()};
    for (std::uint64_t k = first; k < last; ++k) {
      std::uint64_t mask = gray(k);
      nprime.symptoms = cs.negative;
      for (std::size_t j = 0; j < positives.size(); ++j) {
        if ((mask >> j) & 1) nprime.symptoms.insert(positives[j]);
      }
      double t = term_of(nprime);
      if (std::popcount(mask) & 1) t = -t;
      if (fault && mask == full) t = -t;
      acc.add(t);
    }
  });
}

double joint_unchecked(const KnowledgeBase& kb, const Clustering& c, const AbsenceSet& nprime) {
  double v = 1.0;
  for (const auto& t : c.tasks) v *= differential_term(kb, t.differential, nprime);
  return v * residual_term(kb, c.residual(kb), nprime);
}

double evidence_unchecked(const KnowledgeBase& kb, const Case& cs, const EvalOptions& opts) {
  double v;
  if (opts.naive) {
    const auto all = kb.all_disorders();
    v = naive_sum(kb, cs, opts, false, [&](const AbsenceSet& np) { return residual_term(kb, all, np); });
  } else {
    v = GrayEngine(kb, evidence_model(kb), cs).sum(opts, false);
  }
  if (v < -opts.clamp_epsilon || v > 1.0 + opts.clamp_epsilon) {
    throw NumericalError("evidence probability " + std::to_string(v) + " left [0,1] beyond the clamp window");
  }
  return v;
}

void check_numerator(double v, const EvalOptions& opts) {
  if (v < -opts.clamp_epsilon) {
    throw NumericalError("numerator " + std::to_string(v) + " is negative beyond the clamp window");
  }
}

EvalResult finish(double num, double den, std::uint64_t terms, const EvalOptions& opts) {
  if (!(den > opts.clamp_epsilon)) {
    throw ImpossibleEvidence("findings have probability " + std::to_string(den) + " (<= clamp epsilon)");
  }
  EvalResult r{num, den, num / den, terms, false};
  if (r.posterior < 0.0) {
    r.posterior = 0.0;
    r.clamped = true;
  } else if (r.posterior > 1.0) {
    if (r.posterior > 1.0 + opts.clamp_epsilon) {
      throw NumericalError("posterior " + std::to_string(r.posterior) + " exceeds 1 beyond the clamp window");
    }
    r.posterior = 1.0;
    r.clamped = true;
  }
  return r;
}

std::vector<std::uint32_t> ordinals(const DisorderSet& s) {
  std::vector<std::uint32_t> out;
  s.for_each([&](DisorderId d) { out.push_back(d.index); });
  return out;
}

std::vector<std::uint32_t> ordinals(const SymptomSet& s) {
  std::vector<std::uint32_t> out;
  s.for_each([&](SymptomId x) { out.push_back(x.index); });
  return out;
}

std::vector<std::vector<std::uint32_t>> signature_key(const Clustering& c) {
  std::vector<std::vector<std::uint32_t>> key;
  for (const auto& t : c.tasks) {
    key.push_back(ordinals(t.cluster));
    key.push_back(ordinals(t.differential));
  }
  return key;
}

std::vector<std::uint32_t> signature_key(const Candidate& c) { return ordinals(c.disorders); }

EvalResult evaluate(const KnowledgeBase& kb, const Clustering& c, const Case& cs, const EvalOptions& opts) {
  return clustering_probability(kb, c, cs, opts);
}

EvalResult evaluate(const KnowledgeBase& kb, const Candidate& c, const Case& cs, const EvalOptions& opts) {
  return candidate_probability(kb, c, cs, opts);
}

template <typename Item>
std::vector<Ranked<Item>> rank_items(const KnowledgeBase& kb, const std::vector<Item>& items, const Case& cs,
                                     const EvalOptions& opts) {
  std::vector<Ranked<Item>> out(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  EvalOptions inner = opts;
  inner.threads = 1;

  auto work = [&](std::size_t i) {
    try {
      try {
        out[i] = {items[i], evaluate(kb, items[i], cs, inner)};
      } catch (const Error& e) {
        std::string ctx = "item " + std::to_string(i + 1) + " (" + signature(kb, items[i]) + "): " + e.what();
        if (dynamic_cast<const ImpossibleEvidence*>(&e)) throw ImpossibleEvidence(ctx);
        if (dynamic_cast<const CapExceeded*>(&e)) throw CapExceeded(ctx);
        if (dynamic_cast<const NumericalError*>(&e)) throw NumericalError(ctx);
        throw ValidationError(ctx);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t nthreads = std::min(std::max<std::size_t>(opts.threads, 1), items.size());
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1)) work(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<decltype(signature_key(items.front()))> keys;
  keys.reserve(items.size());
  for (const auto& it : items) keys.push_back(signature_key(it));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out[a].result.posterior != out[b].result.posterior) return out[a].result.posterior > out[b].result.posterior;
    return keys[a] < keys[b];
  });
  std::vector<Ranked<Item>> sorted;
  sorted.reserve(items.size());
  for (auto i : order) sorted.push_back(std::move(out[i]));
  return sorted;
}

}  // namespace

double failure_factor(const KnowledgeBase& kb, DisorderId d, const AbsenceSet& nprime) {
  kb.check(d);
  double q = 1.0;
  nprime.symptoms.for_each([&](SymptomId s) { q *= 1.0 - kb.strength(d, s); });
  return kb.prior(d) * q + kb.prior_absent(d);
}

double differential_term(const KnowledgeBase& kb, const DisorderSet& diff, const AbsenceSet& nprime) {
  check_universe(kb, diff, "differential");
  if (diff.empty()) throw ValidationError("differential_term of an empty differential");
  double fail = 1.0;
  double absent = 1.0;
  diff.for_each([&](DisorderId d) {
    fail *= failure_factor(kb, d, nprime);
    absent *= kb.prior_absent(d);
  });
  return fail - absent;
}

double residual_term(const KnowledgeBase& kb, const DisorderSet& dstar, const AbsenceSet& nprime) {
  check_universe(kb, dstar, "residual set");
  double v = 1.0;
  dstar.for_each([&](DisorderId d) { v *= failure_factor(kb, d, nprime); });
  return v;
}

double joint_absent_and_cands(const KnowledgeBase& kb, const Clustering& c, const AbsenceSet& nprime) {
  Case implied{kb.no_symptoms(), kb.no_symptoms()};
  for (const auto& t : c.tasks) {
    if (t.cluster.universe() == kb.num_symptoms()) implied.positive |= t.cluster;
  }
  require_valid(kb, c, implied);
  return joint_unchecked(kb, c, nprime);
}

double joint_absent_and_candidate(const KnowledgeBase& kb, const Candidate& cand, const AbsenceSet& nprime) {
  check_candidate(kb, cand);
  double v = 1.0;
  for (std::size_t i = 0; i < kb.num_disorders(); ++i) {
    DisorderId d(i);
    if (cand.disorders.contains(d)) {
      double q = 1.0;
      nprime.symptoms.for_each([&](SymptomId s) { q *= 1.0 - kb.strength(d, s); });
      v *= kb.prior(d) * q;
    } else {
      v *= failure_factor(kb, d, nprime);
    }
  }
  return v;
}

double numerator(const KnowledgeBase& kb, const Clustering& c, const Case& cs, const EvalOptions& opts) {
  check_case(kb, cs, opts);
  require_valid(kb, c, cs);
  double v;
  if (opts.naive) {
    v = naive_sum(kb, cs, opts, opts.inject_sign_fault,
                  [&](const AbsenceSet& np) { return joint_unchecked(kb, c, np); });
  } else {
    v = GrayEngine(kb, clustering_model(kb, c), cs).sum(opts, opts.inject_sign_fault);
  }
  check_numerator(v, opts);
  return v;
}

double evidence_probability(const KnowledgeBase& kb, const Case& cs, const EvalOptions& opts) {
  check_case(kb, cs, opts);
  return evidence_unchecked(kb, cs, opts);
}

EvalResult clustering_probability(const KnowledgeBase& kb, const Clustering& c, const Case& cs,
                                  const EvalOptions& opts) {
  check_case(kb, cs, opts);
  require_valid(kb, c, cs);
  double den = evidence_unchecked(kb, cs, opts);
  if (!(den > opts.clamp_epsilon)) {
    throw ImpossibleEvidence("findings have probability " + std::to_string(den) + " (<= clamp epsilon)");
  }
  double num = numerator(kb, c, cs, opts);
  return finish(num, den, std::uint64_t{1} << cs.positive.size(), opts);
}

EvalResult candidate_probability(const KnowledgeBase& kb, const Candidate& cand, const Case& cs,
                                 const EvalOptions& opts) {
  check_case(kb, cs, opts);
  check_candidate(kb, cand);
  double den = evidence_unchecked(kb, cs, opts);
  if (!(den > opts.clamp_epsilon)) {
    throw ImpossibleEvidence("findings have probability " + std::to_string(den) + " (<= clamp epsilon)");
  }
  double num;
  if (opts.naive) {
    num = naive_sum(kb, cs, opts, opts.inject_sign_fault,
                    [&](const AbsenceSet& np) { return joint_absent_and_candidate(kb, cand, np); });
  } else {
    num = GrayEngine(kb, candidate_model(kb, cand), cs).sum(opts, opts.inject_sign_fault);
  }
  check_numerator(num, opts);
  return finish(num, den, std::uint64_t{1} << cs.positive.size(), opts);
}

double peng_reggia_score(const KnowledgeBase& kb, const Candidate& cand, const SymptomSet& p) {
  check_candidate(kb, cand);
  check_universe(kb, p, "finding set");
  auto members = cand.disorders.members();
  auto survive = [&](SymptomId s) {
    double v = 1.0;
    for (auto d : members) v *= 1.0 - kb.strength(d, s);
    return v;
  };
  double score = 1.0;
  for (std::size_t i = 0; i < kb.num_symptoms(); ++i) {
    SymptomId s(i);
    score *= p.contains(s) ? 1.0 - survive(s) : survive(s);
  }
  double absent = 1.0;
  for (std::size_t i = 0; i < kb.num_disorders(); ++i) {
    DisorderId d(i);
    if (cand.disorders.contains(d)) continue;
    if (kb.prior_absent(d) == 0.0) {
      throw ValidationError("peng_reggia_score: excluded disorder '" + kb.name(d) +
                            "' has prior 1, so the denominator is zero");
    }
    absent *= kb.prior_absent(d);
  }
  return score / absent;
}

std::vector<Ranked<Clustering>> rank(const KnowledgeBase& kb, const std::vector<Clustering>& items, const Case& cs,
                                     const EvalOptions& opts) {
  return rank_items(kb, items, cs, opts);
}

std::vector<Ranked<Candidate>> rank(const KnowledgeBase& kb, const std::vector<Candidate>& items, const Case& cs,
                                    const EvalOptions& opts) {
  return rank_items(kb, items, cs, opts);
}

std::string signature(const KnowledgeBase& kb, const Candidate& cand) { return format_set(kb, cand.disorders); }

std::string signature(const KnowledgeBase& kb, const Clustering& c) {
  std::string out;
  for (const auto& t : c.tasks) {
    if (!out.empty()) out += '|';
    out += format_set(kb, t.cluster) + "<-" + format_set(kb, t.differential);
  }
  return out;
}

std::string to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["numerator"] = r.numerator;
  j["denominator"] = r.denominator;
  j["posterior"] = r.posterior;
  j["subset_terms"] = r.subset_terms;
  j["clamped"] = r.clamped;
  return j.dump();
}

}  // namespace symclust
