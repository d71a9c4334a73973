#include "theory/experiments.hpp"

#include <algorithm>

#include "common/errors.hpp"

namespace dpa::theory {
namespace {

BanditConfig config_for(const BanditProtocol& p, std::size_t seed_index) {
  BanditConfig c;
  c.beta = p.beta;
  c.mode = p.mode;
  c.advantage = train::AdvantageMode::kCentered;
  c.batch = p.batch;
  c.max_steps = p.max_steps;
  c.schedule = p.schedule;
  c.seed = p.base_seed + seed_index;
  return c;
}

// `optimal` is the index of the action whose probability is tracked.
ConvergenceResult converge(const Bandit& bandit, std::size_t optimal, const BanditProtocol& protocol, double threshold) {
  require(protocol.seeds > 0, "need at least one seed");
  const std::size_t runs = protocol.mode == train::GradientMode::kExpected ? 1 : protocol.seeds;
  ConvergenceResult r;
  r.mean_optimal.assign(protocol.max_steps + 1, 0.0);
  r.final_min = 1.0;
  for (std::size_t s = 0; s < runs; ++s) {
    const std::vector<double> trace = train_bandit(bandit, config_for(protocol, s));
    for (std::size_t t = 0; t < trace.size(); ++t) {
      const double p = optimal == 1 ? trace[t] : 1.0 - trace[t];
      r.mean_optimal[t] += p / static_cast<double>(runs);
    }
    const double last = optimal == 1 ? trace.back() : 1.0 - trace.back();
    r.final_min = std::min(r.final_min, last);
  }
  r.final_mean = r.mean_optimal.back();
  for (std::size_t t = 0; t < r.mean_optimal.size(); ++t) {
    if (r.mean_optimal[t] >= threshold) {
      r.first_step = t;
      break;
    }
  }
  return r;
}

}  // namespace

ConvergenceResult verifier_bandit_convergence(int c_sac, const BanditProtocol& protocol, double threshold) {
  Bandit b;
  b.reward_mean = train::paired_rewards_verifier(c_sac);
  return converge(b, c_sac == 1 ? 1 : 0, protocol, threshold);
}

ConvergenceResult generator_bandit_convergence(int s_x, double s_bar_z, const BanditProtocol& protocol,
                                               double threshold) {
  require(static_cast<double>(s_x) != s_bar_z, "no dominant action when S_x equals S_bar_z");
  Bandit b;
  b.reward_mean = {static_cast<double>(s_x), s_bar_z};
  b.bernoulli = {false, true};
  return converge(b, static_cast<double>(s_x) > s_bar_z ? 0 : 1, protocol, threshold);
}

KlStructureResult kl_structure_check(const Bandit& bandit, const BanditProtocol& protocol) {
  const std::vector<double> ref = {0.5, 0.5};
  KlStructureResult r;
  r.target = kl_best_response_target(ref, bandit.reward_mean, protocol.beta);
  const std::size_t runs = protocol.mode == train::GradientMode::kExpected ? 1 : protocol.seeds;
  for (std::size_t s = 0; s < runs; ++s) {
    const double p1 = train_bandit(bandit, config_for(protocol, s)).back();
    const std::vector<double> pi = {1.0 - p1, p1};
    r.tv_per_seed.push_back(total_variation(pi, r.target));
  }
  r.max_tv = *std::max_element(r.tv_per_seed.begin(), r.tv_per_seed.end());
  return r;
}

BanditProtocol kl_target_protocol(double beta, std::size_t seeds, std::uint64_t base_seed) {
  BanditProtocol p;
  p.beta = beta;
  p.mode = train::GradientMode::kSampled;
  p.batch = 32;
  p.max_steps = 20000;
  p.schedule.kind = train::StepSchedule::Kind::kRobbinsMonro;
  p.schedule.c = 40.0;
  p.schedule.t0 = 100.0;
  p.seeds = seeds;
  p.base_seed = base_seed;
  return p;
}

Bandit kl_target_verifier_bandit() {
  Bandit b;
  b.reward_mean = train::paired_rewards_verifier(1);
  return b;
}

Bandit kl_target_generator_bandit() {
  Bandit b;
  b.reward_mean = {1.0, 0.3};
  b.bernoulli = {false, true};
  return b;
}

}  // namespace dpa::theory
