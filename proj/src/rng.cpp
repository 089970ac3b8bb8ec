#include "c3bv/rng.hpp"

namespace c3bv {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

Vec random_unit_direction(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec g(d);
  double norm = 0.0;
  // A zero draw has probability zero; loop only guards the pathological case.
  do {
    for (Eigen::Index i = 0; i < d; ++i) g[i] = normal(rng);
    norm = g.norm();
  } while (!(norm > 0.0));
  return g / norm;
}

}  // namespace c3bv
