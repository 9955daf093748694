#include "core/rng.hpp"

namespace spsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, StreamKey key, std::uint64_t index) noexcept {
  const auto k = (static_cast<std::uint64_t>(key) << 32) + index + 1;
  return mix64(seed ^ mix64(k));
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

} // namespace spsim
