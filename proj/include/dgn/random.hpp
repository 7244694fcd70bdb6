#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dgn {

/// Seedable generator whose output is reproducible across standard libraries.
///
/// The engine is std::mt19937_64, which the standard pins bit-for-bit. Real
/// variates are derived here instead of through std distributions (whose
/// algorithms are implementation-defined): uniforms take the top 53 bits of one
/// draw, normals use the Box-Muller transform on two uniforms.
class SeededGenerator {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+u53+box_muller";

  explicit SeededGenerator(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in (lo, hi); the open endpoint at lo is hit with probability 2^-53.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Sub-seed for a named stage: mix64(seed ^ fnv1a64(stage)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

}  // namespace dgn
