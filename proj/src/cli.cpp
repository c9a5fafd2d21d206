#include "symclust/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "symclust/bench.hpp"
#include "symclust/covergen.hpp"
#include "symclust/inference.hpp"
#include "symclust/oracle.hpp"
#include "symclust/synthetic.hpp"

namespace symclust::cli {

namespace {

/// Unreadable input file; maps to a usage error.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle disagreement beyond tolerance.
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kOracleTolerance = 1e-9;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Common {
  std::string kb_path;
  std::string case_path;
  std::string clustering_path;
  std::string format = "tsv";
  std::string summation = "compensated";
  std::size_t max_positive = EvalOptions{}.max_positive;
  std::size_t partition_cap = kDefaultPartitionCap;
  std::size_t threads = 1;
  bool naive = false;
  bool inject_fault = false;

  EvalOptions eval_options() const {
    EvalOptions o;
    o.max_positive = max_positive;
    o.summation = summation == "pairwise" ? Summation::pairwise : Summation::compensated;
    o.naive = naive;
    o.threads = threads;
    o.inject_sign_fault = inject_fault;
    return o;
  }
};

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"tsv", "json"}));
}

void add_eval_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--max-positive", c.max_positive, "Largest accepted number of positive findings");
  cmd->add_option("--summation", c.summation, "Alternating-sum accumulation")
      ->check(CLI::IsMember({"compensated", "pairwise"}));
  cmd->add_flag("--naive", c.naive, "Recompute every inclusion-exclusion term from scratch");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void require_causes(const KnowledgeBase& kb, const Case& cs) {
  cs.positive.for_each([&](SymptomId s) {
    if (causes_of(kb, s).empty()) {
      throw ValidationError("positive finding '" + kb.name(s) + "' has no cause in the knowledge base");
    }
  });
}

struct Loaded {
  KnowledgeBase kb;
  Case cs;
};

Loaded load(const Common& c) {
  KnowledgeBase kb = parse_kb(read_file(c.kb_path));
  Case cs = parse_case(read_file(c.case_path), kb);
  return {std::move(kb), std::move(cs)};
}

// ---- validate ------------------------------------------------------------

int cmd_validate(const Common& c, bool permissive, std::ostream& out, std::ostream& err) {
  std::string kb_text = read_file(c.kb_path);
  std::optional<std::string> case_text, clustering_text;
  if (!c.case_path.empty()) case_text = read_file(c.case_path);
  if (!c.clustering_path.empty()) clustering_text = read_file(c.clustering_path);

  KnowledgeBase kb = parse_kb(kb_text);
  out << "kb\tok\t" << kb.num_disorders() << " disorders, " << kb.num_symptoms() << " symptoms, "
      << kb.num_links() << " links\n";
  std::optional<Case> cs;
  if (case_text) {
    cs = parse_case(*case_text, kb);
    out << "case\tok\t" << cs->positive.size() << " positive, " << cs->negative.size() << " negative\n";
  }
  if (clustering_text) {
    Clustering cl = parse_clustering(*clustering_text, kb);
    Case against{kb.no_symptoms(), kb.no_symptoms()};
    if (cs) {
      against = *cs;
    } else {
      for (const auto& t : cl.tasks) against.positive |= t.cluster;
    }
    auto report = validate_clustering(kb, cl, against, ValidateOptions{permissive});
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    if (!report.ok()) {
      for (const auto& v : report.violations) err << "violation: " << v << '\n';
      out << "clustering\tinvalid\t" << report.violations.size() << " violation(s)\n";
      return kValidation;
    }
    out << "clustering\tok\t" << cl.tasks.size() << " tasks, " << cands_count(cl) << " candidates\n";
  }
  return kOk;
}

// ---- differentials -------------------------------------------------------

int cmd_differentials(const Common& c, const std::vector<std::string>& cluster, std::ostream& out) {
  KnowledgeBase kb = parse_kb(read_file(c.kb_path));
  std::vector<SymptomSet> rows;
  if (!cluster.empty()) {
    SymptomSet s = kb.no_symptoms();
    for (const auto& n : cluster) s.insert(kb.symptom(n));
    rows.push_back(s);
  } else {
    if (c.case_path.empty()) throw CLI::ValidationError("differentials", "needs --cluster or --case");
    Case cs = parse_case(read_file(c.case_path), kb);
    cs.positive.for_each([&](SymptomId s) {
      SymptomSet one = kb.no_symptoms();
      one.insert(s);
      rows.push_back(one);
    });
  }
  if (c.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["cluster"] = nlohmann::json::array();
      r.for_each([&](SymptomId s) { row["cluster"].push_back(kb.name(s)); });
      row["differential"] = nlohmann::json::array();
      differential(kb, r).for_each([&](DisorderId d) { row["differential"].push_back(kb.name(d)); });
      arr.push_back(row);
    }
    out << arr.dump() << '\n';
  } else {
    out << "cluster\tdifferential\n";
    for (const auto& r : rows) out << format_set(kb, r) << '\t' << format_set(kb, differential(kb, r)) << '\n';
  }
  return kOk;
}

// ---- clusterings / candidates --------------------------------------------

int cmd_clusterings(const Common& c, std::ostream& out) {
  auto [kb, cs] = load(c);
  require_causes(kb, cs);
  auto all = enumerate_clusterings(kb, cs, c.partition_cap);
  if (c.format == "json") {
    out << '[';
    for (std::size_t i = 0; i < all.size(); ++i) out << (i ? "," : "") << serialize_clustering(kb, all[i]);
    out << "]\n";
  } else {
    out << "index\tsignature\ttasks\tcandidates\n";
    for (std::size_t i = 0; i < all.size(); ++i) {
      out << i + 1 << '\t' << signature(kb, all[i]) << '\t' << all[i].tasks.size() << '\t' << cands_count(all[i])
          << '\n';
    }
  }
  return kOk;
}

int cmd_candidates(const Common& c, std::ostream& out) {
  auto [kb, cs] = load(c);
  std::vector<Candidate> list;
  if (!c.clustering_path.empty()) {
    Clustering cl = parse_clustering(read_file(c.clustering_path), kb);
    require_valid(kb, cl, cs);
    list = cands(cl);
  } else {
    list = minimal_candidates(kb, cs.positive, c.partition_cap);
  }
  if (c.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cand : list) {
      nlohmann::json names = nlohmann::json::array();
      cand.disorders.for_each([&](DisorderId d) { names.push_back(kb.name(d)); });
      arr.push_back(names);
    }
    out << arr.dump() << '\n';
  } else {
    out << "index\tcandidate\tminimal\n";
    for (std::size_t i = 0; i < list.size(); ++i) {
      bool minimal = is_candidate(kb, list[i], cs.positive) && is_minimal(kb, list[i], cs.positive);
      out << i + 1 << '\t' << signature(kb, list[i]) << '\t' << (minimal ? "yes" : "no") << '\n';
    }
  }
  return kOk;
}

// ---- eval / rank -----------------------------------------------------------

void print_result(const EvalResult& r, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << to_json(r) << '\n';
  } else {
    out << "numerator\tdenominator\tposterior\tsubset_terms\tclamped\n"
        << fmt17(r.numerator) << '\t' << fmt17(r.denominator) << '\t' << fmt17(r.posterior) << '\t'
        << r.subset_terms << '\t' << (r.clamped ? "true" : "false") << '\n';
  }
}

int cmd_eval(const Common& c, const std::vector<std::string>& candidate, std::ostream& out) {
  auto [kb, cs] = load(c);
  if (c.clustering_path.empty() == candidate.empty()) {
    throw CLI::ValidationError("eval", "give exactly one of --clustering or --candidate");
  }
  EvalResult r;
  if (!candidate.empty()) {
    r = candidate_probability(kb, make_candidate(kb, candidate), cs, c.eval_options());
  } else {
    r = clustering_probability(kb, parse_clustering(read_file(c.clustering_path), kb), cs, c.eval_options());
  }
  print_result(r, c.format, out);
  return kOk;
}

template <typename Item>
void print_ranked(const KnowledgeBase& kb, const std::vector<Ranked<Item>>& ranked, const std::string& format,
                  std::ostream& out) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& r = ranked[i].result;
      nlohmann::ordered_json row;
      row["rank"] = i + 1;
      row["signature"] = signature(kb, ranked[i].item);
      row["numerator"] = r.numerator;
      row["denominator"] = r.denominator;
      row["posterior"] = r.posterior;
      row["subset_terms"] = r.subset_terms;
      row["clamped"] = r.clamped;
      arr.push_back(row);
    }
    out << arr.dump() << '\n';
  } else {
    out << "rank\tsignature\tnumerator\tdenominator\tposterior\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& r = ranked[i].result;
      out << i + 1 << '\t' << signature(kb, ranked[i].item) << '\t' << fmt17(r.numerator) << '\t'
          << fmt17(r.denominator) << '\t' << fmt17(r.posterior) << '\n';
    }
  }
}

int cmd_rank(const Common& c, const std::string& mode, std::ostream& out) {
  auto [kb, cs] = load(c);
  require_causes(kb, cs);
  auto opts = c.eval_options();
  if (cs.positive.size() > opts.max_positive) {
    throw CapExceeded(std::to_string(cs.positive.size()) + " positive findings exceed --max-positive " +
                      std::to_string(opts.max_positive));
  }
  if (mode == "candidates") {
    print_ranked(kb, rank(kb, minimal_candidates(kb, cs.positive, c.partition_cap), cs, opts), c.format, out);
  } else {
    print_ranked(kb, rank(kb, enumerate_clusterings(kb, cs, c.partition_cap), cs, opts), c.format, out);
  }
  return kOk;
}

// ---- oracle-check ----------------------------------------------------------

struct Check {
  std::size_t case_index;
  std::string kind;
  std::string item;
  std::string case_json;
  double engine;
  double exact;
  double error;
  std::string note;
};

template <typename Item>
Check check_item(const KnowledgeBase& kb, const Item& item, const oracle::Event& event, const Case& cs,
                 std::size_t case_index, const char* kind, const EvalOptions& opts) {
  Check ck{case_index, kind, signature(kb, item), serialize_case(kb, cs), 0.0, 0.0, 0.0, ""};
  oracle::Enumerated exact;
  try {
    exact = oracle::oracle_enumerate(kb, event, cs);
  } catch (const ImpossibleEvidence&) {
    ck.note = "impossible evidence";
    return ck;
  }
  ck.exact = exact.posterior;
  try {
    EvalResult r;
    if constexpr (std::is_same_v<Item, Clustering>) {
      r = clustering_probability(kb, item, cs, opts);
    } else {
      r = candidate_probability(kb, item, cs, opts);
    }
    ck.engine = r.posterior;
    ck.error = oracle::relative_error(r.posterior, exact.posterior);
  } catch (const ImpossibleEvidence& e) {
    if (exact.evidence <= 2 * opts.clamp_epsilon) {
      ck.note = "evidence below clamp epsilon";
    } else {
      ck.engine = std::numeric_limits<double>::quiet_NaN();
      ck.error = std::numeric_limits<double>::infinity();
      ck.note = e.what();
    }
  } catch (const Error& e) {
    ck.engine = std::numeric_limits<double>::quiet_NaN();
    ck.error = std::numeric_limits<double>::infinity();
    ck.note = e.what();
  }
  return ck;
}

int cmd_oracle_check(const Common& c, std::size_t trials, std::uint64_t seed, std::ostream& out,
                     std::ostream& err) {
  auto [kb, given] = load(c);
  if (kb.num_disorders() > oracle::kMaxDisorders) {
    throw CapExceeded("oracle-check needs at most " + std::to_string(oracle::kMaxDisorders) + " disorders");
  }
  auto opts = c.eval_options();

  std::vector<Case> cases{given};
  SeededStream rng(seed);
  const std::size_t ns = kb.num_symptoms();
  for (std::size_t t = 0; t < trials && ns > 0; ++t) {
    std::vector<std::uint32_t> order(ns);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = ns; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::size_t np = 1 + rng.below(std::min<std::size_t>(4, ns));
    std::size_t nn = rng.below(std::min<std::size_t>(3, ns - np) + 1);
    Case cs{kb.no_symptoms(), kb.no_symptoms()};
    for (std::size_t i = 0; i < np; ++i) cs.positive.insert(SymptomId(order[i]));
    for (std::size_t i = 0; i < nn; ++i) cs.negative.insert(SymptomId(order[np + i]));
    cases.push_back(cs);
  }

  std::vector<Check> checks;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const Case& cs = cases[ci];
    bool coverable = true;
    cs.positive.for_each([&](SymptomId s) { coverable = coverable && !causes_of(kb, s).empty(); });
    if (!coverable) {
      if (ci == 0) require_causes(kb, cs);
      continue;
    }
    if (!cs.positive.empty()) {
      for (const auto& cl : enumerate_clusterings(kb, cs, c.partition_cap)) {
        checks.push_back(check_item(kb, cl, oracle::ClusteringCands{cl}, cs, ci, "clustering", opts));
      }
    }
    for (const auto& cand : minimal_candidates(kb, cs.positive, c.partition_cap)) {
      checks.push_back(check_item(kb, cand, oracle::CandidatePresent{cand}, cs, ci, "candidate", opts));
    }
  }

  out << "case\tkind\titem\tengine\toracle\trelative_error\n";
  const Check* worst = nullptr;
  for (const auto& ck : checks) {
    out << ck.case_index << '\t' << ck.kind << '\t' << ck.item << '\t';
    if (!ck.note.empty() && ck.error == 0.0) {
      out << "-\t-\t-\t# " << ck.note << '\n';
      continue;
    }
    out << fmt17(ck.engine) << '\t' << fmt17(ck.exact) << '\t' << fmt17(ck.error) << '\n';
    if (!worst || ck.error > worst->error) worst = &ck;
  }
  double max_err = worst ? worst->error : 0.0;
  out << "checked\t" << checks.size() << "\nmax_relative_error\t" << fmt17(max_err) << '\n';
  if (max_err > kOracleTolerance) {
    err << "oracle mismatch (tolerance " << fmt17(kOracleTolerance) << ")\n"
        << "  case: " << worst->case_json << "\n"
        << "  " << worst->kind << ": " << worst->item << "\n"
        << "  engine posterior: " << fmt17(worst->engine) << "\n"
        << "  oracle posterior: " << fmt17(worst->exact) << "\n";
    if (!worst->note.empty()) err << "  engine error: " << worst->note << "\n";
    return kOracleMismatch;
  }
  return kOk;
}

// ---- bench -----------------------------------------------------------------

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      auto v = std::stoul(text);
      return {v, v};
    }
    auto a = std::stoul(text.substr(0, dots));
    auto b = std::stoul(text.substr(dots + 2));
    if (a > b) throw std::invalid_argument("empty range");
    return {a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--pos-range", "expected A..B, got '" + text + "'");
  }
}

struct BenchArgs {
  std::vector<std::size_t> disorders{1000};
  std::size_t symptoms = 200;
  double density = 0.05;
  std::string pos_range = "12..18";
  std::vector<std::size_t> negatives{20};
  std::uint64_t seed = 1;
  std::string op = "both";
  double min_time = 0.05;
};

int cmd_bench(const Common& c, const BenchArgs& b, std::ostream& out) {
  auto [lo, hi] = parse_range(b.pos_range);
  auto opts = c.eval_options();
  opts.max_positive = std::max(opts.max_positive, hi);
  std::size_t max_neg = *std::max_element(b.negatives.begin(), b.negatives.end());

  out << bench::tsv_header() << '\n';
  for (std::size_t d : b.disorders) {
    SyntheticKbSpec spec;
    spec.disorders = d;
    spec.symptoms = b.symptoms;
    spec.density = b.density;
    spec.seed = b.seed;
    auto w = bench::make_workload(spec, hi, max_neg);
    for (std::size_t n : b.negatives) {
      for (std::size_t p = lo; p <= hi; ++p) {
        for (auto op : {bench::Op::evidence, bench::Op::clustering}) {
          if (b.op != "both" && b.op != bench::op_name(op)) continue;
          if (auto pt = bench::measure(w, op, p, n, opts, b.min_time)) out << bench::to_tsv(*pt) << '\n';
        }
      }
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact probabilities of set-covering candidates and symptom clusterings", "symclust"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common c;
  std::function<int()> action;

  auto kb_opt = [&](CLI::App* cmd) { cmd->add_option("--kb", c.kb_path, "Knowledge-base file")->required(); };
  auto case_opt = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--case", c.case_path, "Case file");
    if (required) o->required();
  };

  bool permissive = false;
  auto* validate = app.add_subcommand("validate", "Check a knowledge base and optional case and clustering");
  kb_opt(validate);
  case_opt(validate, false);
  validate->add_option("--clustering", c.clustering_path, "Clustering file");
  validate->add_flag("--permissive", permissive, "Downgrade differential overlap to a warning");
  validate->callback([&] { action = [&] { return cmd_validate(c, permissive, out, err); }; });

  std::vector<std::string> cluster;
  auto* diffs = app.add_subcommand("differentials", "Differential diagnosis of a cluster or of each positive finding");
  kb_opt(diffs);
  case_opt(diffs, false);
  diffs->add_option("--cluster", cluster, "Comma-separated symptoms")->delimiter(',');
  add_format(diffs, c);
  diffs->callback([&] { action = [&] { return cmd_differentials(c, cluster, out); }; });

  auto* clus = app.add_subcommand("clusterings", "Enumerate symptom clusterings of the positive findings");
  kb_opt(clus);
  case_opt(clus, true);
  clus->add_option("--partition-cap", c.partition_cap, "Largest |P| to partition");
  add_format(clus, c);
  clus->callback([&] { action = [&] { return cmd_clusterings(c, out); }; });

  auto* cand = app.add_subcommand("candidates", "Minimal candidates, or the candidates a clustering entails");
  kb_opt(cand);
  case_opt(cand, true);
  cand->add_option("--clustering", c.clustering_path, "Expand this clustering instead");
  cand->add_option("--partition-cap", c.partition_cap, "Largest |P| accepted");
  add_format(cand, c);
  cand->callback([&] { action = [&] { return cmd_candidates(c, out); }; });

  std::vector<std::string> candidate;
  auto* eval = app.add_subcommand("eval", "Posterior of one clustering or candidate");
  kb_opt(eval);
  case_opt(eval, true);
  eval->add_option("--clustering", c.clustering_path, "Clustering file");
  eval->add_option("--candidate", candidate, "Comma-separated disorders")->delimiter(',');
  add_eval_flags(eval, c);
  add_format(eval, c);
  eval->add_flag("--inject-sign-fault", c.inject_fault)->group("");
  eval->callback([&] { action = [&] { return cmd_eval(c, candidate, out); }; });

  std::string mode = "clusterings";
  auto* rnk = app.add_subcommand("rank", "Rank all clusterings or minimal candidates by posterior");
  kb_opt(rnk);
  case_opt(rnk, true);
  rnk->add_option("--mode", mode, "Items to rank")->check(CLI::IsMember({"clusterings", "candidates"}));
  rnk->add_option("--partition-cap", c.partition_cap, "Largest |P| to enumerate");
  add_eval_flags(rnk, c);
  add_format(rnk, c);
  rnk->callback([&] { action = [&] { return cmd_rank(c, mode, out); }; });

  std::size_t trials = 0;
  std::uint64_t seed = 1;
  auto* orc = app.add_subcommand("oracle-check", "Compare every posterior against brute-force enumeration");
  kb_opt(orc);
  case_opt(orc, true);
  orc->add_option("--trials", trials, "Extra random cases drawn from the knowledge base");
  orc->add_option("--seed", seed, "Seed for the random cases");
  orc->add_option("--partition-cap", c.partition_cap, "Largest |P| to enumerate");
  add_eval_flags(orc, c);
  orc->add_flag("--inject-sign-fault", c.inject_fault)->group("");
  orc->callback([&] { action = [&] { return cmd_oracle_check(c, trials, seed, out, err); }; });

  BenchArgs b;
  auto* bench = app.add_subcommand("bench", "Time evaluation on seeded synthetic knowledge bases");
  bench->add_option("--disorders", b.disorders, "Disorder counts to sweep")->delimiter(',');
  bench->add_option("--symptoms", b.symptoms, "Symptom count");
  bench->add_option("--density", b.density, "Link probability per (disorder, symptom) pair")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--pos-range", b.pos_range, "Positive-finding counts A..B");
  bench->add_option("--neg", b.negatives, "Negative-finding counts to sweep")->delimiter(',');
  bench->add_option("--seed", b.seed, "Generator seed");
  bench->add_option("--op", b.op, "Operation to time")->check(CLI::IsMember({"evidence", "clustering", "both"}));
  bench->add_option("--min-time", b.min_time, "Seconds per timing batch")->check(CLI::PositiveNumber);
  add_eval_flags(bench, c);
  bench->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"tsv"}));
  bench->callback([&] { action = [&] { return cmd_bench(c, b, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    return action();
  } catch (const FileError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ImpossibleEvidence& e) {
    err << "impossible evidence: " << e.what() << '\n';
    return kImpossibleEvidence;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kImpossibleEvidence;
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << '\n';
    return kCapExceeded;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace symclust::cli
