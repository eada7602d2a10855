#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cade {

// Deterministic generator with platform-independent bounded draws.
// std::uniform_*_distribution is implementation-defined, so draws are
// derived directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform double in [0, 1).
  double uniform();
  double normal();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for a named substream of a root seed, optionally indexed
// (e.g. per epoch, per pair). Distinct (tag, a, b) give independent streams.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

inline Rng substream(std::uint64_t root, std::string_view tag, std::uint64_t a = 0,
                     std::uint64_t b = 0) {
  return Rng(derive_seed(root, tag, a, b));
}

}  // namespace cade
