#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

#include "riskstream/errors.hpp"

namespace riskstream {

// Deterministic splitmix64 generator. The state transition and all derived
// draws are fixed by this code, not by the standard library, so streams are
// reproducible bit-for-bit across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform in [0, bound) without modulo bias (Lemire rejection).
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw InternalError("Rng::next_below: zero bound");
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw InternalError("Rng::next_int: empty range");
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Log-uniform over [lo, hi], lo > 0.
  double next_log_uniform(double lo, double hi) {
    double u = next_double();
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  }

  // Index draw proportional to the given non-negative weights.
  std::size_t pick_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw InternalError("Rng::pick_weighted: zero total weight");
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::uint64_t state_;
};

// Named sub-seed derivation: every stage draws from the single run seed mixed
// with a stage label, so stages are independently reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL ^ base;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  // One splitmix round to spread low-entropy labels.
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace riskstream
