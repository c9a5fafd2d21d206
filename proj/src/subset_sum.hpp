#pragma once

// Internal: accumulation and block scheduling for the 2^|P| alternating sums.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "symclust/inference.hpp"

namespace symclust::detail {

/// Terms per block. Each block re-seeds the incremental state directly, which
/// bounds drift from repeated multiply/divide and fixes the reduction tree.
inline constexpr std::uint64_t kBlockTerms = 4096;

inline std::uint64_t gray(std::uint64_t k) { return k ^ (k >> 1); }

/// Neumaier's variant of Kahan summation; robust when |term| > |running sum|.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  auto half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

class Accumulator {
 public:
  explicit Accumulator(Summation mode) : mode_(mode) {}

  void add(double x) {
    if (mode_ == Summation::compensated) {
      comp_.add(x);
    } else {
      terms_.push_back(x);
    }
  }

  double value() const { return mode_ == Summation::compensated ? comp_.value() : pairwise_sum(terms_); }

 private:
  Summation mode_;
  CompensatedSum comp_;
  std::vector<double> terms_;
};

/// Sums `total` signed terms split into fixed blocks. `block(first, last, acc)`
/// adds the terms with Gray index k in [first, last). Block results are
/// reduced in block order, so the value does not depend on the thread count.
template <typename BlockFn>
double run_blocks(std::uint64_t total, const EvalOptions& opts, BlockFn&& block) {
  const std::uint64_t nblocks = (total + kBlockTerms - 1) / kBlockTerms;
  std::vector<double> partial(nblocks, 0.0);
  auto work = [&](std::uint64_t b) {
    Accumulator acc(opts.summation);
    std::uint64_t first = b * kBlockTerms;
    block(first, std::min(total, first + kBlockTerms), acc);
    partial[b] = acc.value();
  };

  std::size_t nthreads = std::min<std::uint64_t>(std::max<std::size_t>(opts.threads, 1), nblocks);
  if (nthreads <= 1) {
    for (std::uint64_t b = 0; b < nblocks; ++b) work(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (auto b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) work(b);
      });
    }
  }

  Accumulator total_acc(opts.summation);
  for (double p : partial) total_acc.add(p);
  return total_acc.value();
}

}  // namespace symclust::detail
