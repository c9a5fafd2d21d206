#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "symclust/model.hpp"

namespace symclust {

/// Reproducible uniform draws on top of std::mt19937_64 (MT19937-64, whose
/// output sequence is fixed by the C++ standard). A double in [0,1) is the
/// top 53 bits of one 64-bit output scaled by 2^-53; nothing goes through
/// std::uniform_real_distribution, whose algorithm is implementation-defined.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// Integer in [0, n) by rejection-free multiply-shift (n > 0).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

struct SyntheticKbSpec {
  std::size_t disorders = 1000;
  std::size_t symptoms = 500;
  double density = 0.05;
  double prior_lo = 0.01;
  double prior_hi = 0.5;
  double strength_lo = 0.1;
  double strength_hi = 0.95;
  std::uint64_t seed = 1;
};

/// Random knowledge base. Draw order: one prior per disorder (d1, d2, ...),
/// then for each disorder and each symptom in ordinal order one inclusion
/// draw (link iff draw < density) followed, for included links only, by one
/// strength draw. Names are d1..dD and s1..sS.
KnowledgeBase generate_kb(const SyntheticKbSpec& spec);

}  // namespace symclust
