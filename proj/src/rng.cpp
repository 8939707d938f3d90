#include "touchbench/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "touchbench/error.hpp"

namespace touchbench {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd) {
  if (spare_) {
    double z = *spare_;
    spare_.reset();
    return mean + sd * z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  return mean + sd * r * std::cos(phi);
}

double Rng::lognormal(double log_mean, double log_sd) {
  return std::exp(normal(log_mean, log_sd));
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "exponential rate must be > 0");
  double u = uniform();
  // 1 - u lies in (0, 1].
  return -std::log1p(-u) / rate;
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "Rng::index requires n > 0");
  // Lemire-style rejection on the top of the range.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::string_view id) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a64(purpose));
  h = splitmix64(h ^ fnv1a64(id));
  return h;
}

}  // namespace touchbench
