#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace hcp {

// Deterministic splitmix64 generator. Every random draw in the project flows
// through an explicitly seeded instance of this class; there is no ambient RNG,
// so a fixed seed reproduces results bit-for-bit across runs and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    uint64_t span = uint64_t(hi - lo) + 1;
    return lo + int(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, no cached spare so the draw count per call is fixed.
  double normal(double mu, double sigma) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  // Derive an independent stream, e.g. per stage or per split.
  Rng fork(uint64_t stream) const {
    Rng r(state_ ^ (0x632be59bd9b4e019ull * (stream + 1)));
    r.next_u64();
    return r;
  }

 private:
  uint64_t state_;
};

// FNV-1a, used to mix string tags (split names) into seeds.
inline uint64_t hash_tag(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace hcp
