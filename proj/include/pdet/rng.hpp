#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pdet::rng {

// Deterministic random stream. The engine is std::mt19937_64 (its output is
// pinned by the standard) and every mapping to doubles/ranges is spelled out
// here instead of going through the implementation-defined std
// distributions, so sequences are reproducible down to the bit across
// compilers and platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1]; safe to feed into log()
  double uniform01_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // standard normal via Box-Muller (cosine branch; two engine draws each)
  double gaussian() {
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // unbiased integer in [0, n), rejection sampled
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
};

// Derive the seed for a named substream of a root seed. Components (corpus,
// noise, agent, attack, ...) each get an independent stream so varying one
// does not perturb the others.
std::uint64_t substream_seed(std::uint64_t root_seed, std::string_view name);

inline Stream substream(std::uint64_t root_seed, std::string_view name) {
  return Stream(substream_seed(root_seed, name));
}

}  // namespace pdet::rng
