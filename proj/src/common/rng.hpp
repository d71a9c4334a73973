#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace dpa {

// splitmix64 finalizer; the basis of every derived seed in the project.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of seed components.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept;

// FNV-1a, used for string salts and config hashes.
std::uint64_t hash_string(std::string_view text) noexcept;

// Standard normal draw that is a pure function of `key`.
double hashed_normal(std::uint64_t key) noexcept;

// Deterministic random stream. The engine output is fixed by the standard;
// conversions to doubles are done here rather than through <random>
// distributions, whose algorithms vary across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF draw; `probs` must sum to one (up to rounding).
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpa
