#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace touchbench {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the variate transforms are implemented here
// because the std:: distributions are implementation-defined, and corpora
// must be byte-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; the second variate of each pair is cached.
  double normal(double mean = 0.0, double sd = 1.0);
  double lognormal(double log_mean, double log_sd);
  double exponential(double rate);

  // Unbiased integer in [0, n). Requires n > 0.
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Stable sub-stream derivation: hash of (master seed, purpose, id). Used so
// that per-session randomness does not depend on processing order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::string_view id = {});

inline Rng derive_rng(std::uint64_t master, std::string_view purpose,
                      std::string_view id = {}) {
  return Rng(derive_seed(master, purpose, id));
}

// 64-bit FNV-1a, exposed for config hashing in reports.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace touchbench
