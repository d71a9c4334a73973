#include "env/features.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::env {
namespace {

constexpr double kMagnitudeScale = 10000.0;  // $100

void push_kind(std::vector<double>& out, RuleKind kind) {
  for (std::size_t k = 0; k < kNumRuleKinds; ++k) out.push_back(static_cast<std::size_t>(kind) == k ? 1.0 : 0.0);
}

}  // namespace

std::string_view to_string(RoleTag tag) {
  switch (tag) {
    case RoleTag::kGeneratorProposal: return "GENERATOR_PROPOSAL";
    case RoleTag::kVerifier: return "VERIFIER";
    case RoleTag::kGeneratorRevision: return "GENERATOR_REVISION";
    case RoleTag::kGeneratorAction: return "GENERATOR_ACTION";
  }
  return "?";
}

std::size_t feature_length(RoleTag tag, std::size_t num_slots) {
  switch (tag) {
    case RoleTag::kGeneratorProposal: return 1 + kNumRuleKinds + 2 * num_slots;
    case RoleTag::kVerifier: return 1 + kNumRuleKinds + 2 * kNumRuleKinds;
    case RoleTag::kGeneratorRevision: return 1 + kNumRuleKinds + 4 * num_slots;
    case RoleTag::kGeneratorAction: return 8;
  }
  return 0;
}

Residual residual_features(const FeatureConfig& config, const TaskInstance& task,
                           std::size_t unit_index, Cents candidate, NoiseSalt salt) {
  const Cents truth = oracle_value(task, unit_index);
  const Cents r = candidate - truth;
  const double sigma = salt == NoiseSalt::kVerifier ? config.verifier_noise : config.generator_noise;
  const std::uint64_t key = mix_seed({config.noise_seed, task.seed, static_cast<std::uint64_t>(unit_index),
                                      static_cast<std::uint64_t>(candidate), static_cast<std::uint64_t>(salt)});
  Residual out;
  out.mismatch = (r != 0 ? 1.0 : 0.0);
  out.magnitude = std::tanh(static_cast<double>(std::llabs(r)) /
                            (static_cast<double>(std::llabs(truth)) + kMagnitudeScale));
  if (sigma > 0.0) {
    out.mismatch += sigma * hashed_normal(mix_seed({key, 0}));
    out.magnitude += sigma * hashed_normal(mix_seed({key, 1}));
  }
  return out;
}

FeatureVector featurize(const FeatureConfig& config, const DecisionContext& context, RoleTag tag,
                        std::optional<Cents> proposal, const sac::SafetyAssuranceCase* sac,
                        std::optional<Cents> revision) {
  require(!context.terminal(), "cannot featurize a terminal context");
  require(config.temperature > 0.0, "temperature must be positive");
  if (tag != RoleTag::kGeneratorProposal && !proposal) {
    fail(ErrorCode::kInvalidArgument, fmt::format("{} features need a proposal", to_string(tag)));
  }
  if (tag == RoleTag::kGeneratorAction && (sac == nullptr || !revision)) {
    fail(ErrorCode::kInvalidArgument, "GENERATOR_ACTION features need a SAC and a revision");
  }

  const TaskInstance& task = context.task();
  const std::size_t unit = context.unit_index();
  const RuleKind kind = task.lines[context.line_index()].kind;
  const std::optional<Cents> suggestion = sac != nullptr ? sac->suggested_correction : std::nullopt;

  FeatureVector fv;
  fv.role_tag = tag;
  std::vector<double>& out = fv.values;
  out.reserve(feature_length(tag, config.num_slots));
  out.push_back(1.0);

  switch (tag) {
    case RoleTag::kGeneratorProposal: {
      push_kind(out, kind);
      const CandidateSet cands = candidate_set(task, unit, config.num_slots - 1);
      for (Cents c : cands.values) {
        const Residual res = residual_features(config, task, unit, c, NoiseSalt::kProposal);
        out.push_back(res.mismatch);
        out.push_back(res.magnitude);
      }
      break;
    }
    case RoleTag::kVerifier: {
      push_kind(out, kind);
      const Residual res = residual_features(config, task, unit, *proposal, NoiseSalt::kVerifier);
      for (std::size_t k = 0; k < kNumRuleKinds; ++k) {
        const bool active = static_cast<std::size_t>(kind) == k;
        out.push_back(active ? res.mismatch : 0.0);
        out.push_back(active ? res.magnitude : 0.0);
      }
      break;
    }
    case RoleTag::kGeneratorRevision: {
      push_kind(out, kind);
      const CandidateSet cands = candidate_set(task, unit, config.num_slots - 1);
      for (Cents c : cands.values) {
        const Residual res = residual_features(config, task, unit, c, NoiseSalt::kRevision);
        out.push_back(res.mismatch);
        out.push_back(res.magnitude);
        out.push_back(c == *proposal ? 1.0 : 0.0);
        out.push_back(suggestion && c == *suggestion ? 1.0 : 0.0);
      }
      break;
    }
    case RoleTag::kGeneratorAction: {
      const Residual rx = residual_features(config, task, unit, *proposal, NoiseSalt::kAction);
      const Residual rz = residual_features(config, task, unit, *revision, NoiseSalt::kAction);
      out.push_back(rx.mismatch);
      out.push_back(rx.magnitude);
      out.push_back(rz.mismatch);
      out.push_back(rz.magnitude);
      out.push_back(*revision == *proposal ? 1.0 : 0.0);
      out.push_back(suggestion ? 1.0 : 0.0);
      out.push_back(suggestion && *revision == *suggestion ? 1.0 : 0.0);
      break;
    }
  }
  if (config.temperature != 1.0) {
    for (double& v : out) v /= config.temperature;
  }
  return fv;
}

}  // namespace dpa::env
