#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "game/game.hpp"
#include "train/trainer.hpp"

namespace dpa::train {

struct EvalConfig {
  bool greedy = true;
  // Revision samples in stochastic evaluation (no oracle in the selection).
  std::size_t k = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

game::RolloutConfig eval_rollout(const EvalConfig& config, const env::FeatureConfig& features, Method method);

std::vector<game::Transition> evaluate(const policy::PolicyParams& params, std::span<const env::TaskInstance> tasks,
                                       const EvalConfig& config, const env::FeatureConfig& features, Method method);

struct StepRecord {
  std::size_t step = 0;
  double eta = 0.0;
  std::size_t samples_seen = 0;
  std::size_t transitions = 0;
  double sac_rate = 0.0;
  double batch_accuracy = 0.0;
  game::CaseHistogram histogram;
  double verifier_loss = 0.0;
  double generator_loss = 0.0;
  double verifier_kl = 0.0;
  double generator_kl = 0.0;
  std::size_t verifier_groups = 0;
  std::size_t action_groups = 0;
  std::size_t proposal_groups = 0;
  std::size_t revision_groups = 0;
  std::array<double, policy::kNumHeads> grad_norm{};
};

// Evaluation of the parameters in force before update `step` (step 0 is the
// untrained policy, step max_steps the final one).
struct EvalRecord {
  std::size_t step = 0;
  std::size_t samples_seen = 0;
  game::CaseHistogram test;
  // Submitted accuracy on the first three training tasks.
  std::array<double, 3> train_abc{};
};

struct TrainingRun {
  Method method = Method::kDpaGrpo;
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  policy::PolicyParams final_params;
};

// Steps whose parameters are evaluated: 0, multiples of eval_interval, the
// final step, and every step of the first and last `window` steps.
std::vector<std::size_t> eval_steps(std::size_t max_steps, std::size_t eval_interval, std::size_t window);

// Task indices for step `step`: `batch_tasks` distinct tasks, seeded by
// (seed, step) only so that every method sees the same batches.
std::vector<std::size_t> batch_indices(std::uint64_t seed, std::size_t step, std::size_t num_tasks,
                                       std::size_t batch_tasks);

// Full training loop (or the generator-only baseline) with periodic
// evaluation on `test`.
TrainingRun train_loop(const TrainConfig& config, const EvalConfig& eval, const env::FeatureConfig& features,
                       std::span<const env::TaskInstance> train, std::span<const env::TaskInstance> test, Method method,
                       std::size_t window = 5);

}  // namespace dpa::train
