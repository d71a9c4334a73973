#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "common/matrix.hpp"
#include "game/game.hpp"
#include "policy/policy.hpp"

namespace dpa::train {

struct StepSchedule {
  enum class Kind : std::uint8_t { kConstant, kRobbinsMonro };
  Kind kind = Kind::kConstant;
  double eta = 0.5;
  // Robbins-Monro: eta_t = c / (t + t0).
  double c = 0.5;
  double t0 = 10.0;

  double at(std::size_t t) const;
};

enum class GradientMode : std::uint8_t {
  kSampled,   // score-function estimate from the sampled action
  kExpected,  // exact expectation over the head's categorical distribution
};

enum class AdvantageMode : std::uint8_t {
  kNormalized,  // (R - mean) / (population std + eps_A)
  kCentered,    // R - mean
};

std::string_view to_string(GradientMode m);
std::string_view to_string(AdvantageMode m);

struct TrainConfig {
  double beta_v = 0.04;
  double beta_fx = 0.04;
  double beta_fz = 0.04;
  double beta_fa = 0.04;
  double epsilon_a = 1e-6;
  StepSchedule schedule;
  std::size_t batch_tasks = 8;
  std::size_t revision_k = 5;
  std::size_t max_steps = 150;
  std::size_t eval_interval = 5;
  std::uint64_t seed = 1;
  GradientMode gradient_mode = GradientMode::kSampled;
  AdvantageMode advantage_mode = AdvantageMode::kNormalized;
  // Abort when the mean SAC rate over the last `visitation_window` steps
  // drops below the floor; KEEP/REVISE groups would vanish.
  double visitation_floor = 0.001;
  std::size_t visitation_window = 5;
  double sac_cost = 0.0;
  double parse_failure_rate = 0.0;
  std::size_t threads = 1;
};

void validate(const TrainConfig& config);

// (R(NS), R(SAC)) indexed by verifier action.
std::array<double, 2> paired_rewards_verifier(int c_sac, double sac_cost = 0.0);
// (R(KEEP), R(REVISE)) indexed by generator action.
std::array<double, 2> paired_rewards_generator(int s_x, int s_z);

std::vector<double> group_advantage(std::span<const double> rewards, double epsilon_a,
                                    AdvantageMode mode = AdvantageMode::kNormalized);

struct PairedGroup {
  policy::HeadId head = policy::HeadId::kIntervene;
  std::array<double, 2> rewards{};
  std::array<double, 2> advantages{};
  std::array<double, 2> old_logp{};
  // Action taken in the rollout (sampled-mode gradients use it).
  std::size_t taken = 0;
};

PairedGroup make_paired_group(policy::HeadId head, const std::array<double, 2>& rewards,
                              const std::vector<double>& probs, std::size_t taken, double epsilon_a,
                              AdvantageMode mode);

struct LossGrad {
  double loss = 0.0;
  double kl = 0.0;
  Matrix reward_grad;  // advantage part
  Matrix kl_grad;      // KL-anchor part

  Matrix total() const;
};

// Expected mode: loss = -sum_a pi_a A_a + beta * KL(pi || pi_ref) with the
// gradient -sum_a pi_a A_a score_a + beta * grad KL. `advantages` has one
// entry per action of the head.
LossGrad pair_loss_expected(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                            std::span<const double> advantages, double beta);

// Sampled mode for one drawn action a:
// [-A(a) + beta * (log pi(a) - log pi_ref(a))] * score(a). Its expectation
// under pi equals the expected-mode gradient.
LossGrad pair_loss_sampled(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                           std::size_t n_actions, std::size_t chosen, double advantage, double beta);

enum class GradSource : std::uint8_t { kVerifier, kAction, kProposal, kRevision };
inline constexpr std::size_t kNumSources = 4;
enum class GradTerm : std::uint8_t { kReward, kKl };
std::string_view to_string(GradSource s);

// Gradient mass (sum of absolute entries) routed into each head, by source
// group and loss term.
struct SourceLedger {
  std::array<std::array<std::array<double, 2>, kNumSources>, policy::kNumHeads> mass{};

  void add(policy::HeadId head, GradSource source, GradTerm term, const Matrix& g);
  double at(policy::HeadId head, GradSource source) const;
};

struct StepGradients {
  policy::PolicyParams grad;
  std::array<std::size_t, policy::kNumHeads> groups{};
  SourceLedger ledger;
  double verifier_loss = 0.0;
  double generator_loss = 0.0;
  double verifier_kl = 0.0;
  double generator_kl = 0.0;
  std::size_t verifier_groups = 0;
  std::size_t action_groups = 0;
  std::size_t proposal_groups = 0;
  std::size_t revision_groups = 0;
};

enum class Method : std::uint8_t { kDpaGrpo, kGeneratorOnly };
std::string_view to_string(Method m);

// Builds all groups of one rollout batch and returns per-head mean gradients
// of the losses. Proposal groups (two fresh proposals per context, reward
// S_x) draw from a stream keyed on (proposal_seed, task, unit) so that both
// methods see identical proposal samples.
StepGradients compute_gradients(std::span<const game::Transition> batch, const policy::PolicyParams& params,
                                const policy::PolicyParams& ref, const TrainConfig& config,
                                const env::FeatureConfig& features, Method method, std::uint64_t proposal_seed);

// theta then phi. Throws kNumeric on non-finite values.
void apply_gradients(policy::PolicyParams& params, const StepGradients& g, double eta, Method method);

struct StepMetrics {
  std::size_t step = 0;
  double eta = 0.0;
  std::size_t transitions = 0;
  double sac_rate = 0.0;
  double batch_accuracy = 0.0;
  game::CaseHistogram histogram;
  StepGradients gradients;
};

struct TrainState {
  policy::PolicyParams params;
  policy::ReferenceSnapshot reference;
  std::size_t step = 0;
  std::size_t samples_seen = 0;
  std::vector<double> sac_rates;
};

TrainState initial_state(std::size_t num_slots);

// Rollout configuration used for training batches (stochastic, oracle-scored
// best-of-K).
game::RolloutConfig training_rollout(const TrainConfig& config, const env::FeatureConfig& features, Method method);

// One training step on a batch of tasks: roll out, build groups,
// update theta then phi. Baseline mode forces NS and updates only the
// proposal head.
StepMetrics train_step(TrainState& state, std::span<const env::TaskInstance> batch, const TrainConfig& config,
                       const env::FeatureConfig& features, Method method);

}  // namespace dpa::train
