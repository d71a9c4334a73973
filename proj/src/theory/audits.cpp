#include "theory/audits.hpp"

#include <cmath>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::theory {
namespace {

std::string label_at(std::span<const std::string> labels, std::size_t i) {
  return i < labels.size() ? labels[i] : fmt::format("ctx{}", i);
}

void finish(BestResponseReport& r) {
  std::size_t matched = 0;
  double mass = 0.0;
  for (const ContextAudit& row : r.rows) {
    if (row.excluded) continue;
    ++r.audited;
    matched += row.argmax_action == row.optimal_action ? 1 : 0;
    mass += row.suboptimal_mass;
  }
  if (r.audited > 0) {
    r.match_rate = static_cast<double>(matched) / static_cast<double>(r.audited);
    r.mean_suboptimal_mass = mass / static_cast<double>(r.audited);
  }
}

}  // namespace

BestResponseReport verifier_audit(std::span<const std::array<double, 2>> probs, std::span<const int> c_sac,
                                  std::span<const std::string> labels) {
  require(probs.size() == c_sac.size(), "probabilities and labels differ in length");
  BestResponseReport r;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    ContextAudit row;
    row.label = label_at(labels, i);
    row.optimal_action = c_sac[i] == 1 ? 1 : 0;
    row.argmax_action = probs[i][1] > probs[i][0] ? 1 : 0;
    row.suboptimal_mass = probs[i][1 - row.optimal_action];
    row.s_x = 1.0 - c_sac[i];
    r.rows.push_back(std::move(row));
  }
  finish(r);
  return r;
}

BestResponseReport dominance_audit(std::span<const std::array<double, 2>> probs, std::span<const double> s_x,
                                   std::span<const double> s_bar_z, std::span<const std::string> labels) {
  require(probs.size() == s_x.size() && probs.size() == s_bar_z.size(), "audit inputs differ in length");
  BestResponseReport r;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    ContextAudit row;
    row.label = label_at(labels, i);
    row.s_x = s_x[i];
    row.s_bar_z = s_bar_z[i];
    row.excluded = s_x[i] == s_bar_z[i];
    row.optimal_action = s_x[i] > s_bar_z[i] ? 0 : 1;
    row.argmax_action = probs[i][1] > probs[i][0] ? 1 : 0;
    row.suboptimal_mass = row.excluded ? 0.0 : probs[i][1 - row.optimal_action];
    r.rows.push_back(std::move(row));
  }
  finish(r);
  return r;
}

BestResponseReport verifier_best_response_audit(const TabularGame& game, const GamePoint& p) {
  std::vector<std::array<double, 2>> probs;
  std::vector<int> c_sac;
  for (const TabularContext& c : game.contexts) {
    const std::vector<double> pi = policy::action_distribution(p.theta, c.features, 2);
    probs.push_back({pi[0], pi[1]});
    c_sac.push_back(1 - c.s_x);
  }
  return verifier_audit(probs, c_sac);
}

BestResponseReport generator_dominance_audit(const TabularGame& game, const GamePoint& p) {
  std::vector<std::array<double, 2>> probs;
  std::vector<double> s_x, s_bar_z;
  for (const TabularContext& c : game.contexts) {
    const std::vector<double> pi = policy::action_distribution(p.phi, c.features, 2);
    probs.push_back({pi[0], pi[1]});
    s_x.push_back(c.s_x);
    s_bar_z.push_back(c.s_bar_z);
  }
  return dominance_audit(probs, s_x, s_bar_z);
}

BestResponseReport verifier_best_response_audit(const policy::PolicyParams& params,
                                                std::span<const game::Transition> contexts,
                                                const env::FeatureConfig& features) {
  std::vector<std::array<double, 2>> probs;
  std::vector<int> c_sac;
  std::vector<std::string> labels;
  for (const game::Transition& tr : contexts) {
    const env::FeatureVector f = env::featurize(features, tr.context, env::RoleTag::kVerifier, tr.proposal);
    const std::vector<double> pi = policy::action_distribution(params.verifier.intervene_head, f.values, 2);
    probs.push_back({pi[0], pi[1]});
    c_sac.push_back(tr.c_sac);
    labels.push_back(fmt::format("{}/{}", tr.context.task().id, tr.context.unit_index()));
  }
  return verifier_audit(probs, c_sac, labels);
}

BestResponseReport generator_dominance_audit(const policy::PolicyParams& params,
                                             std::span<const game::Transition> contexts,
                                             const game::RolloutConfig& rollout, std::size_t samples,
                                             std::uint64_t seed) {
  require(samples > 0, "need at least one sample per context");
  std::vector<std::array<double, 2>> probs;
  std::vector<double> s_x, s_bar_z;
  std::vector<std::string> labels;
  for (const game::Transition& tr : contexts) {
    const env::DecisionContext& ctx = tr.context;
    Rng rng(mix_seed({seed, ctx.task().seed, static_cast<std::uint64_t>(ctx.unit_index()), hash_string("dominance")}));
    const env::FeatureVector fv = env::featurize(rollout.features, ctx, env::RoleTag::kVerifier, tr.proposal);
    const std::vector<double> pt =
        policy::action_distribution(params.verifier.template_head, fv.values, sac::kNumDrawableTemplates);
    double sz = 0.0;
    std::array<double, 2> mass{};
    for (std::size_t s = 0; s < samples; ++s) {
      const sac::SafetyAssuranceCase sac = sac::emit_sac(ctx, tr.proposal, rng.categorical(pt));
      const env::FeatureVector fr = env::featurize(rollout.features, ctx, env::RoleTag::kGeneratorRevision, tr.proposal, &sac);
      const game::RevisionOutcome rev =
          game::best_of_k_revision(params, rollout, ctx, sac, tr.proposal, fr.values, tr.candidates, rng);
      sz += env::score_correct(rev.value, ctx.task(), ctx.unit_index());
      const env::FeatureVector fa =
          env::featurize(rollout.features, ctx, env::RoleTag::kGeneratorAction, tr.proposal, &sac, rev.value);
      const std::vector<double> pa = policy::action_distribution(params.generator.action_head, fa.values, 2);
      mass[0] += pa[0];
      mass[1] += pa[1];
    }
    const double n = static_cast<double>(samples);
    probs.push_back({mass[0] / n, mass[1] / n});
    s_x.push_back(tr.s_x);
    s_bar_z.push_back(sz / n);
    labels.push_back(fmt::format("{}/{}", ctx.task().id, ctx.unit_index()));
  }
  return dominance_audit(probs, s_x, s_bar_z, labels);
}

}  // namespace dpa::theory
