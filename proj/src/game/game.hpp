#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "env/features.hpp"
#include "env/task_env.hpp"
#include "policy/policy.hpp"
#include "sac/sac.hpp"

namespace dpa::game {

using env::Cents;

enum class VerifierAction : std::uint8_t { kNoSac = 0, kSac = 1 };
enum class GeneratorAction : std::uint8_t { kKeep = 0, kRevise = 1 };

std::string_view to_string(VerifierAction y);
std::string_view to_string(GeneratorAction a);

enum class CaseLabel : std::uint8_t { kC1, kC2, kC3, kC4, kC5A, kC5B, kC6A, kC6B };
inline constexpr std::size_t kNumCases = 8;
inline constexpr CaseLabel kAllCases[kNumCases] = {CaseLabel::kC1,  CaseLabel::kC2,  CaseLabel::kC3,  CaseLabel::kC4,
                                                   CaseLabel::kC5A, CaseLabel::kC5B, CaseLabel::kC6A, CaseLabel::kC6B};
std::string_view to_string(CaseLabel c);

struct RolloutConfig {
  env::FeatureConfig features;
  std::size_t revision_k = 5;
  // Training picks among the K revisions by oracle correctness; evaluation
  // picks the most probable valid one.
  bool oracle_selection = true;
  // Argmax actions with ties to the lowest index.
  bool greedy = false;
  double parse_failure_rate = 0.0;
  std::optional<VerifierAction> force_verifier;
  std::optional<GeneratorAction> force_action;
};

struct RevisionCandidate {
  std::size_t slot = 0;
  Cents value = 0;
  bool valid = true;
  int correct = 0;
  double prob = 0.0;
};

struct LogProbs {
  double proposal = 0.0;
  double verifier = 0.0;
  std::optional<double> template_draw;
  std::optional<double> revision;
  std::optional<double> action;
};

struct Transition {
  explicit Transition(const env::DecisionContext& ctx) : context(ctx) {}

  env::DecisionContext context;
  std::vector<Cents> candidates;
  std::size_t proposal_slot = 0;
  Cents proposal = 0;
  VerifierAction verifier_action = VerifierAction::kNoSac;
  std::optional<sac::SafetyAssuranceCase> sac;
  std::optional<std::size_t> template_draw;
  std::optional<Cents> revision;
  // Slot of the chosen revision; absent when it came from the fallback path.
  std::optional<std::size_t> revision_slot;
  std::vector<RevisionCandidate> revision_candidates;
  bool revision_fallback = false;
  GeneratorAction generator_action = GeneratorAction::kKeep;
  Cents submitted = 0;
  int s_x = 0;
  std::optional<int> s_z;
  int c_sac = 1;
  std::optional<sac::SacScore> sac_score;
  LogProbs logp;

  env::FeatureVector proposal_features;
  env::FeatureVector verifier_features;
  std::optional<env::FeatureVector> revision_features;
  std::optional<env::FeatureVector> action_features;
};

// Throws when the structural invariants of a transition are violated.
void check_invariants(const Transition& tr);

struct RevisionOutcome {
  Cents value = 0;
  std::optional<std::size_t> slot;
  std::vector<RevisionCandidate> candidates;
  bool fallback = false;
};

// Samples K candidates from the revision head restricted to values other
// than the proposal (or its argmax when greedy),
// drops malformed ones and selects per `oracle_selection`. With no survivor
// the SAC's suggested correction is used, else the proposal itself.
RevisionOutcome best_of_k_revision(const policy::PolicyParams& params, const RolloutConfig& config,
                                   const env::DecisionContext& context, const sac::SafetyAssuranceCase& sac,
                                   Cents proposal, std::span<const double> revision_features,
                                   std::span<const Cents> candidates, Rng& rng);

Transition rollout_unit(const env::DecisionContext& context, const policy::PolicyParams& params,
                        const RolloutConfig& config, Rng& rng);

// All units of one task, in order; o_t feeds the next context.
std::vector<Transition> rollout_task(const env::TaskInstance& task, const policy::PolicyParams& params,
                                     const RolloutConfig& config, Rng& rng);

// Every task with its own stream mix(seed, task.seed); output ordered by
// (task position, unit) regardless of `threads`.
std::vector<Transition> rollout_tasks(std::span<const env::TaskInstance> tasks, const policy::PolicyParams& params,
                                      const RolloutConfig& config, std::uint64_t seed, std::size_t threads = 1);

CaseLabel classify_case(int s_x, VerifierAction y, GeneratorAction a, std::optional<int> s_z);
CaseLabel classify_case(const Transition& tr);

struct CaseHistogram {
  std::array<std::size_t, kNumCases> counts{};
  std::size_t total = 0;
  std::size_t submitted_correct = 0;
  // C2 transitions whose revision was correct (they submit a correct z).
  std::size_t c2_revision_correct = 0;

  void add(const Transition& tr);
  std::size_t count(CaseLabel c) const { return counts[static_cast<std::size_t>(c)]; }
  double rate(CaseLabel c) const;
  double accuracy() const;
  // accuracy through the case composition: C1 + C3 + C5A + C2[S_z = 1].
  double composed_accuracy() const;
};

CaseHistogram aggregate(std::span<const Transition> batch);

}  // namespace dpa::game
