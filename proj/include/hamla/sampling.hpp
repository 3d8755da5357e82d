#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hamla/field.hpp"

namespace hamla {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::size_t kDefaultSampleCount = 25;

struct SampleBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static SampleBox cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Uniform double in [0, 1) built from the top 53 bits, identical on every
/// platform for a given engine state.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);

std::vector<Point> sample_box(const SampleBox& box, std::size_t count, std::uint64_t seed);

}  // namespace hamla
