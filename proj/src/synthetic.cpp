#include "symclust/synthetic.hpp"

#include <string>
#include <utility>
#include <vector>

namespace symclust {

KnowledgeBase generate_kb(const SyntheticKbSpec& spec) {
  if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw ValidationError("density must lie in [0,1]");
  SeededStream rng(spec.seed);

  std::vector<std::pair<std::string, double>> disorders;
  disorders.reserve(spec.disorders);
  for (std::size_t d = 0; d < spec.disorders; ++d) {
    disorders.emplace_back("d" + std::to_string(d + 1), rng.uniform(spec.prior_lo, spec.prior_hi));
  }
  std::vector<std::string> symptoms;
  symptoms.reserve(spec.symptoms);
  for (std::size_t s = 0; s < spec.symptoms; ++s) symptoms.push_back("s" + std::to_string(s + 1));

  std::vector<KnowledgeBase::Link> links;
  for (std::size_t d = 0; d < spec.disorders; ++d) {
    for (std::size_t s = 0; s < spec.symptoms; ++s) {
      if (rng.unit() < spec.density) {
        links.push_back({disorders[d].first, symptoms[s], rng.uniform(spec.strength_lo, spec.strength_hi)});
      }
    }
  }
  return KnowledgeBase(std::move(disorders), std::move(symptoms), links);
}

}  // namespace symclust
