#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "env/task_env.hpp"
#include "sac/sac.hpp"

namespace dpa::env {

enum class RoleTag : std::uint8_t {
  kGeneratorProposal,
  kVerifier,
  kGeneratorRevision,
  kGeneratorAction,
};

std::string_view to_string(RoleTag tag);

struct FeatureConfig {
  std::size_t num_slots = 7;
  double verifier_noise = 0.5;
  double generator_noise = 0.8;
  std::uint64_t noise_seed = 0;
  // Logit temperature; linear heads make this a 1/T feature scale.
  double temperature = 1.0;
};

struct FeatureVector {
  std::vector<double> values;
  RoleTag role_tag = RoleTag::kVerifier;
};

// Fixed length per role:
//   proposal  1 + kinds + 2 * slots   (bias, rule kind, per-slot residuals)
//   verifier  1 + kinds + 2 * kinds   (bias, rule kind, per-template residuals)
//   revision  1 + kinds + 4 * slots   (+ is-proposal, is-suggested per slot)
//   action    8                        (residuals of x and z, agreement flags)
std::size_t feature_length(RoleTag tag, std::size_t num_slots);

// Consistency residual features of `candidate` for unit `unit_index`:
// {mismatch bit, squashed magnitude}, each plus deterministic Gaussian noise
// keyed on (noise seed, task, unit, candidate, salt).
struct Residual {
  double mismatch = 0.0;
  double magnitude = 0.0;
};
// Each salt is an independent noisy look at the same candidate. The KEEP/REVISE
// decision gets its own so it is not a replay of the revision draw.
enum class NoiseSalt : std::uint64_t { kVerifier = 1, kProposal = 2, kRevision = 3, kAction = 4 };
Residual residual_features(const FeatureConfig& config, const TaskInstance& task,
                           std::size_t unit_index, Cents candidate, NoiseSalt salt);

// `proposal` is required for every tag except kGeneratorProposal; `sac` and
// `revision` are required for kGeneratorAction.
FeatureVector featurize(const FeatureConfig& config, const DecisionContext& context, RoleTag tag,
                        std::optional<Cents> proposal = std::nullopt,
                        const sac::SafetyAssuranceCase* sac = nullptr,
                        std::optional<Cents> revision = std::nullopt);

}  // namespace dpa::env
