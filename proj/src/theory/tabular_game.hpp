#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "common/matrix.hpp"
#include "common/rng.hpp"
#include "train/trainer.hpp"

namespace dpa::theory {

// One enumerable decision context: the proposal's correctness S_x is fixed
// (so c_sac = 1 - S_x), and a revision is correct with probability s_bar_z.
struct TabularContext {
  double weight = 1.0;
  int s_x = 0;
  double s_bar_z = 0.0;
  std::vector<double> features;
};

// Verifier head theta (features x {NS, SAC}) and generator action head phi
// (features x {KEEP, REVISE}) shared across contexts.
struct GamePoint {
  Matrix theta;
  Matrix phi;
  friend bool operator==(const GamePoint&, const GamePoint&) = default;
};

struct TabularGame {
  std::vector<TabularContext> contexts;
  double beta_v = 0.04;
  double beta_fa = 0.04;
  GamePoint reference;

  std::size_t dim() const { return contexts.front().features.size(); }
  GamePoint zero_point() const;
};

// Two contexts with features +1 / -1: context 1 has a wrong proposal and a
// likely-correct revision (S_x = 0, S_bar_z = 0.9), context 2 a correct
// proposal and a poor revision (S_x = 1, S_bar_z = 0.3). Equal weights,
// uniform reference.
TabularGame two_context_game(double beta);

double distance(const GamePoint& a, const GamePoint& b);
GamePoint axpy(const GamePoint& x, double s, const GamePoint& y);

// J_v = sum_k w_k [E_{pi_V}[R_V] - beta_v KL(pi_V || ref)]
double objective_v(const TabularGame& game, const GamePoint& p);
// J_f = sum_k w_k pi_V(SAC|k) [E_{pi_a}[R_G] - beta_fa KL(pi_a || ref)],
// R_G(KEEP) = S_x, R_G(REVISE) = S_bar_z.
double objective_f(const TabularGame& game, const GamePoint& p);

// F(phi, theta) = (grad_phi J_f, grad_theta J_v), exact by enumeration.
GamePoint vector_field(const TabularGame& game, const GamePoint& p);

struct Residual {
  double phi = 0.0;    // ||grad_phi J_f||
  double theta = 0.0;  // ||grad_theta J_v||
  double max() const { return phi > theta ? phi : theta; }
};
Residual stationarity_residual(const TabularGame& game, const GamePoint& p);

// Unbiased single-batch estimate of F: `batch` contexts drawn by weight,
// y ~ pi_V, and on SAC a ~ pi_a with S_z ~ Bernoulli(S_bar_z); centered
// paired advantages and score-function gradients as in the sampled trainer.
GamePoint sampled_field(const TabularGame& game, const GamePoint& p, std::size_t batch, Rng& rng);

enum class Integrator : std::uint8_t { kEuler, kRk4 };

GamePoint ode_step(const TabularGame& game, const GamePoint& p, double dt, Integrator method);

struct TrajectoryPoint {
  double time = 0.0;
  GamePoint point;
};

// Integrates the game ODE to `horizon` with fixed step dt (last step
// shortened to land on the horizon); records every `record_every` steps and
// the endpoint.
std::vector<TrajectoryPoint> ode_trajectory(const TabularGame& game, const GamePoint& init, double horizon, double dt,
                                            Integrator method = Integrator::kEuler, std::size_t record_every = 1);

// Single-context paired-action bandit.
// Action rewards are means; an entry flagged `bernoulli` is drawn as a 0/1
// sample per group in sampled mode.
struct Bandit {
  std::array<double, 2> reward_mean{};
  std::array<bool, 2> bernoulli{};
};

struct BanditConfig {
  double beta = 0.01;
  train::GradientMode mode = train::GradientMode::kExpected;
  train::AdvantageMode advantage = train::AdvantageMode::kCentered;
  double epsilon_a = 1e-6;
  std::size_t batch = 32;
  std::size_t max_steps = 2000;
  train::StepSchedule schedule;
  std::uint64_t seed = 1;
};

// Probability trajectory of action 1 (index 0 is the initial point).
std::vector<double> train_bandit(const Bandit& bandit, const BanditConfig& config);

// pi*(a) proportional to ref(a) * exp(R(a) / beta).
std::vector<double> kl_best_response_target(std::span<const double> ref, std::span<const double> rewards, double beta);

double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace dpa::theory
