#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "symclust/inference.hpp"
#include "symclust/model.hpp"
#include "symclust/synthetic.hpp"

namespace symclust::testing {

inline std::string data_path(const std::string& name) { return std::string(SYMCLUST_TEST_DATA) + "/" + name; }

inline std::string read_data(const std::string& name) {
  std::ifstream in(data_path(name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Six disorders, seven symptoms, the reference Effects-of table; priors 0.1, strengths 0.9.
inline KnowledgeBase paperkb_u() { return parse_kb(read_data("paperkb_u.json")); }

/// d1 (prior 0.2): s1 0.8; d2 (prior 0.1): s1 0.5, s2 0.9.
inline KnowledgeBase tiny2() { return parse_kb(read_data("tiny2.json")); }

inline Clustering paper_clustering(const KnowledgeBase& kb) {
  return make_clustering(kb, {{{"s1", "s4"}, {"d2", "d4"}}, {{"s2", "s3"}, {"d1", "d3"}}});
}

inline SymptomSet symptoms(const KnowledgeBase& kb, std::initializer_list<const char*> names) {
  SymptomSet s = kb.no_symptoms();
  for (auto n : names) s.insert(kb.symptom(n));
  return s;
}

inline DisorderSet disorders(const KnowledgeBase& kb, std::initializer_list<const char*> names) {
  DisorderSet s = kb.no_disorders();
  for (auto n : names) s.insert(kb.disorder(n));
  return s;
}

inline AbsenceSet absent(const KnowledgeBase& kb, std::initializer_list<const char*> names) {
  return AbsenceSet{symptoms(kb, names)};
}

/// Random small KB for property suites: 3-10 disorders, 3-8 symptoms.
inline KnowledgeBase random_small_kb(SeededStream& rng, double density = 0.4) {
  SyntheticKbSpec spec;
  spec.disorders = 3 + rng.below(8);
  spec.symptoms = 3 + rng.below(6);
  spec.density = density;
  spec.seed = rng.next();
  return generate_kb(spec);
}

/// Random case with |P| <= max_pos, |N| <= max_neg, disjoint.
inline Case random_case(const KnowledgeBase& kb, SeededStream& rng, std::size_t max_pos, std::size_t max_neg) {
  Case c{kb.no_symptoms(), kb.no_symptoms()};
  std::size_t np = rng.below(max_pos + 1);
  std::size_t nn = rng.below(max_neg + 1);
  for (std::size_t i = 0; i < np; ++i) c.positive.insert(SymptomId(rng.below(kb.num_symptoms())));
  for (std::size_t i = 0; i < nn; ++i) {
    SymptomId s(rng.below(kb.num_symptoms()));
    if (!c.positive.contains(s)) c.negative.insert(s);
  }
  return c;
}

}  // namespace symclust::testing
