#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "theory/tabular_game.hpp"

namespace dpa::theory {

struct BanditProtocol {
  double beta = 0.01;
  train::GradientMode mode = train::GradientMode::kExpected;
  std::size_t batch = 32;
  std::size_t max_steps = 2000;
  train::StepSchedule schedule;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 1;
};

struct ConvergenceResult {
  // Seed-averaged probability of the optimal (dominant) action per step.
  std::vector<double> mean_optimal;
  // First step where the seed average reaches the threshold.
  std::optional<std::size_t> first_step;
  double final_mean = 0.0;
  double final_min = 0.0;
};

// Single-context verifier bandit, y* = SAC iff c_sac = 1.
ConvergenceResult verifier_bandit_convergence(int c_sac, const BanditProtocol& protocol, double threshold = 0.99);

// KEEP/REVISE bandit with R(KEEP) = S_x and R(REVISE) ~
// Bernoulli(S_bar_z). Reports mass on the dominant action; the dominated
// mass is 1 - mean_optimal.
ConvergenceResult generator_bandit_convergence(int s_x, double s_bar_z, const BanditProtocol& protocol,
                                               double threshold = 0.95);

// TV distance between the final trained policy of each seed and
// pi_ref * exp(R / beta).
struct KlStructureResult {
  std::vector<double> target;
  std::vector<double> tv_per_seed;
  double max_tv = 0.0;
};
KlStructureResult kl_structure_check(const Bandit& bandit, const BanditProtocol& protocol);

// Sampled gradients (batch 32) for 20,000 Robbins-Monro steps,
// eta_t = 40 / (t + 100).
BanditProtocol kl_target_protocol(double beta, std::size_t seeds, std::uint64_t base_seed);

// The two single-context games checked against the closed-form target:
// verifier with c_sac = 1, generator with S_x = 1 and S_z ~ Bernoulli(0.3).
Bandit kl_target_verifier_bandit();
Bandit kl_target_generator_bandit();

}  // namespace dpa::theory
