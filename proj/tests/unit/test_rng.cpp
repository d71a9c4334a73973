#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "common/rng.hpp"

namespace dpa {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, MixSeedIsOrderSensitive) {
  EXPECT_NE(mix_seed({1, 2}), mix_seed({2, 1}));
  EXPECT_EQ(mix_seed({1, 2, 3}), mix_seed({1, 2, 3}));
}

TEST(Rng, UniformIntCoversClosedRange) {
  Rng rng(7);
  std::array<int, 5> seen{};
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    ++seen[static_cast<std::size_t>(v + 2)];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(Rng, CategoricalMatchesProbabilities) {
  Rng rng(3);
  const std::array<double, 3> p = {0.2, 0.5, 0.3};
  std::array<int, 3> counts{};
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(p)];
  for (std::size_t k = 0; k < 3; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    EXPECT_NEAR(static_cast<double>(counts[k]) / n, p[k], 5 * se);
  }
}

TEST(Rng, CategoricalNeverPicksZeroMass) {
  Rng rng(5);
  const std::array<double, 3> p = {0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(rng.categorical(p), 1u);
}

TEST(Rng, HashedNormalMoments) {
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = hashed_normal(mix_seed({9, static_cast<std::uint64_t>(i)}));
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

}  // namespace
}  // namespace dpa
