#include "npca/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace npca {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t id) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return splitmix64(h ^ id);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be > 0");
  // Rejection sampling on the largest multiple of bound.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::int64_t RngStream::geometric_trials(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("geometric_trials: p must be > 0");
  if (p >= 1.0) return 1;
  // Inversion: P(K > k) = (1-p)^k.
  const double u = 1.0 - uniform01();  // (0, 1]
  const double k = std::floor(std::log(u) / std::log1p(-p));
  if (k >= 4.0e18) return std::numeric_limits<std::int64_t>::max() / 4;
  return 1 + static_cast<std::int64_t>(k);
}

}  // namespace npca
