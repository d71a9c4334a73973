#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "theory/audits.hpp"
#include "theory/experiments.hpp"
#include "theory/tabular_game.hpp"
#include "theory/tracking.hpp"

namespace dpa::theory {
namespace {

using testing::finite_difference;
using testing::random_matrix;
using testing::relative_error;

GamePoint random_point(const TabularGame& g, Rng& rng) {
  return {random_matrix(g.dim(), 2, rng, 2.0), random_matrix(g.dim(), 2, rng, 2.0)};
}

TEST(KlTarget, Examples) {
  const std::vector<double> ref{0.5, 0.5};
  const std::vector<double> small = kl_best_response_target(ref, std::vector<double>{1.0, 0.0}, 0.5);
  EXPECT_NEAR(small[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(small[0], 0.8808, 1e-4);
  const std::vector<double> big = kl_best_response_target(ref, std::vector<double>{1.0, 0.0}, 0.04);
  EXPECT_NEAR(1.0 - big[0], std::exp(-25.0), 1e-15);
  EXPECT_NEAR(1.0 - big[0], 1.4e-11, 0.1e-11);
  const std::vector<double> skew = kl_best_response_target(std::vector<double>{0.2, 0.8}, std::vector<double>{0.0, 0.0}, 0.5);
  EXPECT_NEAR(skew[0], 0.2, 1e-15);
}

TEST(KlTarget, TotalVariation) {
  EXPECT_DOUBLE_EQ(total_variation(std::vector<double>{0.3, 0.7}, std::vector<double>{0.5, 0.5}), 0.2);
  EXPECT_EQ(total_variation(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 0.0}), 0.0);
}

TEST(TabularGame, FieldIsGradientOfObjectives) {
  Rng rng(5);
  for (double beta : {0.04, 0.5}) {
    const TabularGame g = two_context_game(beta);
    for (int draw = 0; draw < 64; ++draw) {
      const GamePoint p = random_point(g, rng);
      const GamePoint f = vector_field(g, p);
      const Matrix dphi = finite_difference([&](const Matrix& m) { return objective_f(g, {p.theta, m}); }, p.phi);
      const Matrix dtheta = finite_difference([&](const Matrix& m) { return objective_v(g, {m, p.phi}); }, p.theta);
      EXPECT_LT(relative_error(f.phi, dphi), 1e-6);
      EXPECT_LT(relative_error(f.theta, dtheta), 1e-6);
    }
  }
}

TEST(TabularGame, SampledFieldIsUnbiased) {
  const TabularGame g = two_context_game(0.04);
  Rng init(6);
  const GamePoint p = random_point(g, init);
  const GamePoint exact = vector_field(g, p);
  Rng rng(7);
  GamePoint mean{Matrix(g.dim(), 2), Matrix(g.dim(), 2)};
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean = axpy(mean, 1.0 / n, sampled_field(g, p, 8, rng));
  EXPECT_LT(distance(mean, exact), 0.02);
}

TEST(TabularGame, Rk4AgreesWithFineEuler) {
  const TabularGame g = two_context_game(0.04);
  Rng rng(8);
  const GamePoint p = random_point(g, rng);
  const GamePoint rk = ode_trajectory(g, p, 2.0, 0.05, Integrator::kRk4).back().point;
  const GamePoint eu = ode_trajectory(g, p, 2.0, 1e-4, Integrator::kEuler, 1000).back().point;
  EXPECT_LT(distance(rk, eu), 1e-3);
}

TEST(TabularGame, TrajectoryLandsOnHorizon) {
  const TabularGame g = two_context_game(0.04);
  const std::vector<TrajectoryPoint> t = ode_trajectory(g, g.zero_point(), 1.03, 0.1, Integrator::kRk4, 3);
  EXPECT_DOUBLE_EQ(t.front().time, 0.0);
  EXPECT_NEAR(t.back().time, 1.03, 1e-12);
}

TEST(TabularGame, OdeReachesStationaryBestResponse) {
  const TabularGame g = two_context_game(1.0);
  const GamePoint end = ode_trajectory(g, g.zero_point(), 200.0, 0.05, Integrator::kRk4, 4000).back().point;
  EXPECT_LT(stationarity_residual(g, end).max(), 1e-8);
  const BestResponseReport v = verifier_best_response_audit(g, end);
  EXPECT_EQ(v.match_rate, 1.0);
  const BestResponseReport a = generator_dominance_audit(g, end);
  EXPECT_EQ(a.match_rate, 1.0);
}

TEST(RobbinsMonro, TimeAndInverse) {
  EXPECT_DOUBLE_EQ(robbins_monro_time(0.5, 10.0, 0), 0.0);
  EXPECT_DOUBLE_EQ(robbins_monro_time(0.5, 10.0, 2), 0.05 + 0.5 / 11.0);
  const double n = robbins_monro_steps_to(0.5, 10.0, 3.0);
  const auto k = static_cast<std::size_t>(n);
  EXPECT_GE(robbins_monro_time(0.5, 10.0, k), 3.0);
  EXPECT_LT(robbins_monro_time(0.5, 10.0, k - 1), 3.0);
  EXPECT_GT(robbins_monro_steps_to(0.5, 10.0, 20.0), 1e17);
}

TEST(Audits, VerifierMatchesCsac) {
  const std::vector<std::array<double, 2>> probs{{0.1, 0.9}, {0.8, 0.2}, {0.6, 0.4}};
  const std::vector<int> c{1, 0, 1};
  const BestResponseReport r = verifier_audit(probs, c);
  EXPECT_EQ(r.audited, 3u);
  EXPECT_NEAR(r.match_rate, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.mean_suboptimal_mass, (0.1 + 0.2 + 0.6) / 3.0, 1e-15);
}

TEST(Audits, DominanceExcludesTies) {
  const std::vector<std::array<double, 2>> probs{{0.9, 0.1}, {0.3, 0.7}, {0.5, 0.5}};
  const std::vector<double> sx{1.0, 0.0, 0.5};
  const std::vector<double> sz{0.3, 0.9, 0.5};
  const BestResponseReport r = dominance_audit(probs, sx, sz);
  EXPECT_EQ(r.audited, 2u);
  EXPECT_TRUE(r.rows[2].excluded);
  EXPECT_EQ(r.match_rate, 1.0);
  EXPECT_NEAR(r.mean_suboptimal_mass, 0.2, 1e-15);
}

TEST(Bandits, VerifierConvergesToSacWhenWrong) {
  BanditProtocol p;
  p.seeds = 3;
  p.max_steps = 400;
  const ConvergenceResult r = verifier_bandit_convergence(1, p);
  ASSERT_TRUE(r.first_step.has_value());
  EXPECT_GE(r.final_min, 0.99);
}

TEST(Bandits, KlStructureMatchesTarget) {
  BanditProtocol p;
  p.beta = 0.5;
  p.seeds = 2;
  p.max_steps = 3000;
  const KlStructureResult r = kl_structure_check(Bandit{{1.0, 0.0}, {false, false}}, p);
  EXPECT_LT(r.max_tv, 0.01);
}

}  // namespace
}  // namespace dpa::theory
