#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "game/game.hpp"
#include "policy/policy.hpp"
#include "theory/tabular_game.hpp"

namespace dpa::theory {

struct ContextAudit {
  std::string label;
  std::size_t optimal_action = 0;
  std::size_t argmax_action = 0;
  double suboptimal_mass = 0.0;
  double s_x = 0.0;
  double s_bar_z = 0.0;
  // Generator audit only: S_x == S_bar_z, no dominant action.
  bool excluded = false;
};

struct BestResponseReport {
  std::vector<ContextAudit> rows;
  std::size_t audited = 0;
  double match_rate = 0.0;
  double mean_suboptimal_mass = 0.0;
};

// Verifier best response: y* = SAC iff c_sac = 1. `probs` are (P(NS), P(SAC)) per context.
BestResponseReport verifier_audit(std::span<const std::array<double, 2>> probs, std::span<const int> c_sac,
                                  std::span<const std::string> labels = {});

// KEEP dominates when S_x > S_bar_z, REVISE when S_x < S_bar_z.
// `probs` are (P(KEEP), P(REVISE)) per context.
BestResponseReport dominance_audit(std::span<const std::array<double, 2>> probs, std::span<const double> s_x,
                                   std::span<const double> s_bar_z, std::span<const std::string> labels = {});

BestResponseReport verifier_best_response_audit(const TabularGame& game, const GamePoint& p);
BestResponseReport generator_dominance_audit(const TabularGame& game, const GamePoint& p);

// On environment contexts taken from rollout transitions (context and
// proposal); the verifier distribution is recomputed from `params`.
BestResponseReport verifier_best_response_audit(const policy::PolicyParams& params,
                                                std::span<const game::Transition> contexts,
                                                const env::FeatureConfig& features);

// Each context is forced onto the SAC branch `samples` times (template draw,
// best-of-K revision under `rollout`), estimating S_bar_z and the mean
// action-head mass on the dominated action.
BestResponseReport generator_dominance_audit(const policy::PolicyParams& params,
                                             std::span<const game::Transition> contexts,
                                             const game::RolloutConfig& rollout, std::size_t samples,
                                             std::uint64_t seed);

}  // namespace dpa::theory
