#include "hamla/sampling.hpp"

#include "hamla/errors.hpp"

namespace hamla {

SampleBox SampleBox::cube(int dim, double lo, double hi) {
  return SampleBox{std::vector<double>(static_cast<std::size_t>(dim), lo),
                   std::vector<double>(static_cast<std::size_t>(dim), hi)};
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::vector<Point> sample_box(const SampleBox& box, std::size_t count, std::uint64_t seed) {
  if (box.lo.size() != box.hi.size()) throw ShapeError("sampling box bounds have different lengths");
  for (std::size_t i = 0; i < box.lo.size(); ++i)
    if (!(box.lo[i] <= box.hi[i])) throw ShapeError("sampling box has lo > hi in coordinate " + std::to_string(i));
  std::mt19937_64 rng(seed);
  std::vector<Point> points(count, Point(box.lo.size()));
  for (auto& p : points)
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = uniform(rng, box.lo[i], box.hi[i]);
  return points;
}

}  // namespace hamla
