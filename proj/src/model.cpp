#include "symclust/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace symclust {

using json = nlohmann::json;

namespace {

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), e.byte);
  }
}

void require_object(const json& j, const char* ctx, std::initializer_list<const char*> allowed,
                    std::initializer_list<const char*> required) {
  if (!j.is_object()) throw ParseError(std::string(ctx) + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ParseError(std::string(ctx) + ": unknown key '" + key + "'");
  }
  for (const char* r : required) {
    if (!j.contains(r)) throw ParseError(std::string(ctx) + ": missing key '" + r + "'");
  }
}

std::string get_string(const json& j, const char* ctx) {
  if (!j.is_string()) throw ParseError(std::string(ctx) + ": expected a string, got " + j.dump());
  return j.get<std::string>();
}

double get_number(const json& j, const char* ctx) {
  if (!j.is_number()) throw ParseError(std::string(ctx) + ": expected a number, got " + j.dump());
  return j.get<double>();
}

std::vector<std::string> get_string_array(const json& j, const char* ctx) {
  if (!j.is_array()) throw ParseError(std::string(ctx) + ": expected an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(get_string(e, ctx));
  return out;
}

template <typename Tag>
json names_of(const KnowledgeBase& kb, const IdSet<Tag>& s) {
  json arr = json::array();
  s.for_each([&](Ordinal<Tag> id) { arr.push_back(kb.name(id)); });
  return arr;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::vector<std::pair<std::string, double>> disorders,
                             std::vector<std::string> symptoms, const std::vector<Link>& links) {
  disorder_names_.reserve(disorders.size());
  priors_.resize(static_cast<Eigen::Index>(disorders.size()));
  for (std::size_t i = 0; i < disorders.size(); ++i) {
    auto& [name, prior] = disorders[i];
    if (name.empty()) throw ValidationError("disorder id must be non-empty");
    if (!disorder_index_.emplace(name, static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate disorder id '" + name + "'");
    }
    if (!in_unit_interval(prior)) {
      throw ValidationError("prior of '" + name + "' out of range [0,1]: " + std::to_string(prior));
    }
    priors_[static_cast<Eigen::Index>(i)] = prior;
    disorder_names_.push_back(std::move(name));
  }
  symptom_names_.reserve(symptoms.size());
  for (std::size_t i = 0; i < symptoms.size(); ++i) {
    auto& name = symptoms[i];
    if (name.empty()) throw ValidationError("symptom id must be non-empty");
    if (disorder_index_.count(name)) {
      throw ValidationError("id '" + name + "' declared as both disorder and symptom");
    }
    if (!symptom_index_.emplace(name, static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate symptom id '" + name + "'");
    }
    symptom_names_.push_back(std::move(name));
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(links.size());
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& link : links) {
    auto d = disorder(link.disorder);
    auto s = symptom(link.symptom);
    if (!std::isfinite(link.strength) || link.strength < 0.0 || link.strength > 1.0) {
      throw ValidationError("strength of " + link.disorder + "->" + link.symptom +
                            " out of range (0,1]: " + std::to_string(link.strength));
    }
    if (link.strength == 0.0) {
      throw ValidationError("explicit zero strength for " + link.disorder + "->" + link.symptom +
                            "; omit the link instead");
    }
    if (!seen.emplace(d.index, s.index).second) {
      throw ValidationError("duplicate link " + link.disorder + "->" + link.symptom);
    }
    triplets.emplace_back(d.index, s.index, link.strength);
  }
  effects_.resize(static_cast<Eigen::Index>(num_disorders()), static_cast<Eigen::Index>(num_symptoms()));
  effects_.setFromTriplets(triplets.begin(), triplets.end());
  effects_.makeCompressed();
  causes_ = effects_;
  causes_.makeCompressed();
}

DisorderId KnowledgeBase::disorder(std::string_view name) const {
  auto it = disorder_index_.find(std::string(name));
  if (it == disorder_index_.end()) {
    if (symptom_index_.count(std::string(name))) {
      throw ValidationError("'" + std::string(name) + "' is a symptom, not a disorder");
    }
    throw ValidationError("unknown disorder '" + std::string(name) + "'");
  }
  return DisorderId(it->second);
}

SymptomId KnowledgeBase::symptom(std::string_view name) const {
  auto it = symptom_index_.find(std::string(name));
  if (it == symptom_index_.end()) {
    if (disorder_index_.count(std::string(name))) {
      throw ValidationError("'" + std::string(name) + "' is a disorder, not a symptom");
    }
    throw ValidationError("unknown symptom '" + std::string(name) + "'");
  }
  return SymptomId(it->second);
}

bool KnowledgeBase::has_disorder(std::string_view name) const {
  return disorder_index_.count(std::string(name)) != 0;
}

bool KnowledgeBase::has_symptom(std::string_view name) const {
  return symptom_index_.count(std::string(name)) != 0;
}

void KnowledgeBase::check(DisorderId d) const {
  if (d.index >= num_disorders()) {
    throw ValidationError("unknown disorder ordinal " + std::to_string(d.index));
  }
}

void KnowledgeBase::check(SymptomId s) const {
  if (s.index >= num_symptoms()) {
    throw ValidationError("unknown symptom ordinal " + std::to_string(s.index));
  }
}

DisorderSet Clustering::residual(const KnowledgeBase& kb) const {
  DisorderSet out = kb.all_disorders();
  for (const auto& t : tasks) out -= t.differential;
  return out;
}

Case make_case(const KnowledgeBase& kb, const std::vector<std::string>& positive,
               const std::vector<std::string>& negative) {
  Case c{kb.no_symptoms(), kb.no_symptoms()};
  for (const auto& n : positive) c.positive.insert(kb.symptom(n));
  for (const auto& n : negative) {
    auto s = kb.symptom(n);
    if (c.positive.contains(s)) {
      throw ValidationError("symptom '" + n + "' listed as both positive and negative");
    }
    c.negative.insert(s);
  }
  return c;
}

Candidate make_candidate(const KnowledgeBase& kb, const std::vector<std::string>& disorders) {
  if (disorders.empty()) throw ValidationError("a candidate needs at least one disorder");
  Candidate c{kb.no_disorders()};
  for (const auto& n : disorders) c.disorders.insert(kb.disorder(n));
  return c;
}

Clustering make_clustering(
    const KnowledgeBase& kb,
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& tasks) {
  Clustering out;
  for (const auto& [cluster, differential] : tasks) {
    Task t{kb.no_symptoms(), kb.no_disorders()};
    for (const auto& n : cluster) t.cluster.insert(kb.symptom(n));
    for (const auto& n : differential) t.differential.insert(kb.disorder(n));
    out.tasks.push_back(std::move(t));
  }
  return out;
}

KnowledgeBase parse_kb(std::string_view text) {
  json j = parse_json(text, "knowledge base");
  require_object(j, "knowledge base", {"disorders", "symptoms", "links"}, {"disorders", "symptoms", "links"});

  std::vector<std::pair<std::string, double>> disorders;
  if (!j["disorders"].is_array()) throw ParseError("knowledge base: 'disorders' must be an array");
  for (const auto& d : j["disorders"]) {
    require_object(d, "disorder entry", {"id", "prior"}, {"id", "prior"});
    disorders.emplace_back(get_string(d["id"], "disorder id"), get_number(d["prior"], "disorder prior"));
  }

  auto symptoms = get_string_array(j["symptoms"], "symptoms");

  std::vector<KnowledgeBase::Link> links;
  if (!j["links"].is_array()) throw ParseError("knowledge base: 'links' must be an array");
  for (const auto& l : j["links"]) {
    require_object(l, "link entry", {"disorder", "symptom", "strength"}, {"disorder", "symptom", "strength"});
    links.push_back({get_string(l["disorder"], "link disorder"), get_string(l["symptom"], "link symptom"),
                     get_number(l["strength"], "link strength")});
  }
  return KnowledgeBase(std::move(disorders), std::move(symptoms), links);
}

Case parse_case(std::string_view text, const KnowledgeBase& kb) {
  json j = parse_json(text, "case");
  require_object(j, "case", {"positive", "negative"}, {"positive", "negative"});
  return make_case(kb, get_string_array(j["positive"], "positive findings"),
                   get_string_array(j["negative"], "negative findings"));
}

Clustering parse_clustering(std::string_view text, const KnowledgeBase& kb) {
  json j = parse_json(text, "clustering");
  require_object(j, "clustering", {"tasks"}, {"tasks"});
  if (!j["tasks"].is_array()) throw ParseError("clustering: 'tasks' must be an array");
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> tasks;
  for (const auto& t : j["tasks"]) {
    require_object(t, "task", {"cluster", "differential"}, {"cluster", "differential"});
    tasks.emplace_back(get_string_array(t["cluster"], "cluster"),
                       get_string_array(t["differential"], "differential"));
  }
  return make_clustering(kb, tasks);
}

std::string serialize_kb(const KnowledgeBase& kb) {
  json j;
  j["disorders"] = json::array();
  for (std::size_t i = 0; i < kb.num_disorders(); ++i) {
    DisorderId d(i);
    j["disorders"].push_back({{"id", kb.name(d)}, {"prior", kb.prior(d)}});
  }
  j["symptoms"] = json::array();
  for (std::size_t i = 0; i < kb.num_symptoms(); ++i) j["symptoms"].push_back(kb.name(SymptomId(i)));
  j["links"] = json::array();
  const auto& m = kb.effects_matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      j["links"].push_back({{"disorder", kb.name(DisorderId(static_cast<std::uint32_t>(it.row())))},
                            {"symptom", kb.name(SymptomId(static_cast<std::uint32_t>(it.col())))},
                            {"strength", it.value()}});
    }
  }
  return j.dump(2);
}

std::string serialize_case(const KnowledgeBase& kb, const Case& c) {
  json j{{"positive", names_of(kb, c.positive)}, {"negative", names_of(kb, c.negative)}};
  return j.dump();
}

std::string serialize_clustering(const KnowledgeBase& kb, const Clustering& c) {
  json tasks = json::array();
  for (const auto& t : c.tasks) {
    tasks.push_back({{"cluster", names_of(kb, t.cluster)}, {"differential", names_of(kb, t.differential)}});
  }
  return json{{"tasks", tasks}}.dump();
}

DisorderSet causes_of(const KnowledgeBase& kb, SymptomId s) {
  kb.check(s);
  DisorderSet out = kb.no_disorders();
  const auto& m = kb.causes_matrix();
  for (Eigen::SparseMatrix<double>::InnerIterator it(m, s.index); it; ++it) {
    out.insert(DisorderId(static_cast<std::uint32_t>(it.row())));
  }
  return out;
}

SymptomSet effects_of(const KnowledgeBase& kb, DisorderId d) {
  kb.check(d);
  SymptomSet out = kb.no_symptoms();
  const auto& m = kb.effects_matrix();
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, d.index); it; ++it) {
    out.insert(SymptomId(static_cast<std::uint32_t>(it.col())));
  }
  return out;
}

std::string format_set(const KnowledgeBase& kb, const DisorderSet& s) {
  std::string out;
  s.for_each([&](DisorderId d) {
    if (!out.empty()) out += ',';
    out += kb.name(d);
  });
  return out;
}

std::string format_set(const KnowledgeBase& kb, const SymptomSet& s) {
  std::string out;
  s.for_each([&](SymptomId x) {
    if (!out.empty()) out += ',';
    out += kb.name(x);
  });
  return out;
}

ValidationReport validate_clustering(const KnowledgeBase& kb, const Clustering& c, const Case& cs,
                                     ValidateOptions opts) {
  ValidationReport report;
  auto violation = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  if (cs.positive.universe() != kb.num_symptoms() || cs.negative.universe() != kb.num_symptoms()) {
    violation("case was built against a different knowledge base");
    return report;
  }
  if (cs.positive.intersects(cs.negative)) {
    violation("case lists " + format_set(kb, cs.positive & cs.negative) + " as both positive and negative");
  }

  SymptomSet covered = kb.no_symptoms();
  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    const Task& t = c.tasks[i];
    std::string label = "task " + std::to_string(i + 1);
    if (t.cluster.universe() != kb.num_symptoms() || t.differential.universe() != kb.num_disorders()) {
      violation(label + ": built against a different knowledge base");
      continue;
    }
    if (t.cluster.empty()) violation(label + ": empty cluster");
    if (t.differential.empty()) violation(label + ": empty differential");

    t.differential.for_each([&](DisorderId d) {
      t.cluster.for_each([&](SymptomId s) {
        if (kb.strength(d, s) <= 0.0) {
          violation(label + ": " + kb.name(d) + " in differential cannot cause " + kb.name(s));
        }
      });
    });

    if (t.cluster.intersects(covered)) {
      violation(label + ": cluster repeats " + format_set(kb, t.cluster & covered) +
                " already in an earlier cluster");
    }
    covered |= t.cluster;

    for (std::size_t k = 0; k < i; ++k) {
      const Task& u = c.tasks[k];
      if (u.differential.universe() != kb.num_disorders()) continue;
      if (t.differential.intersects(u.differential)) {
        std::string msg = "tasks " + std::to_string(k + 1) + " and " + std::to_string(i + 1) +
                          " share differential disorder(s) " + format_set(kb, t.differential & u.differential);
        if (opts.permissive) {
          report.warnings.push_back(std::move(msg));
        } else {
          violation(std::move(msg));
        }
      }
    }
  }

  auto extra = covered - cs.positive;
  if (!extra.empty()) violation("clusters contain " + format_set(kb, extra) + " which are not positive findings");
  auto missing = cs.positive - covered;
  if (!missing.empty()) violation("positive findings " + format_set(kb, missing) + " are in no cluster");
  return report;
}

void require_valid(const KnowledgeBase& kb, const Clustering& c, const Case& cs) {
  auto report = validate_clustering(kb, c, cs);
  if (report.ok()) return;
  std::ostringstream os;
  os << "invalid clustering:";
  for (const auto& v : report.violations) os << "\n  " << v;
  throw ValidationError(os.str());
}

}  // namespace symclust
