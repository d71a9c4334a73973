#include "train/train_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::train {

game::RolloutConfig eval_rollout(const EvalConfig& config, const env::FeatureConfig& features, Method method) {
  game::RolloutConfig rc;
  rc.features = features;
  rc.revision_k = config.k;
  rc.oracle_selection = false;
  rc.greedy = config.greedy;
  if (method == Method::kGeneratorOnly) rc.force_verifier = game::VerifierAction::kNoSac;
  return rc;
}

std::vector<game::Transition> evaluate(const policy::PolicyParams& params, std::span<const env::TaskInstance> tasks,
                                       const EvalConfig& config, const env::FeatureConfig& features, Method method) {
  require(config.k >= 1, "eval k must be >= 1");
  return game::rollout_tasks(tasks, params, eval_rollout(config, features, method),
                             mix_seed({config.seed, hash_string("eval")}), config.threads);
}

std::vector<std::size_t> eval_steps(std::size_t max_steps, std::size_t eval_interval, std::size_t window) {
  std::set<std::size_t> steps;
  for (std::size_t s = 0; s <= max_steps; s += eval_interval) steps.insert(s);
  steps.insert(max_steps);
  for (std::size_t i = 0; i < window && i <= max_steps; ++i) {
    steps.insert(i);
    steps.insert(max_steps - i);
  }
  return {steps.begin(), steps.end()};
}

std::vector<std::size_t> batch_indices(std::uint64_t seed, std::size_t step, std::size_t num_tasks,
                                       std::size_t batch_tasks) {
  require(num_tasks > 0, "no training tasks");
  std::vector<std::size_t> idx(num_tasks);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t n = std::min(batch_tasks, num_tasks);
  Rng rng(mix_seed({seed, static_cast<std::uint64_t>(step), hash_string("batch")}));
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(num_tasks) - 1));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

TrainingRun train_loop(const TrainConfig& config, const EvalConfig& eval, const env::FeatureConfig& features,
                       std::span<const env::TaskInstance> train, std::span<const env::TaskInstance> test, Method method,
                       std::size_t window) {
  validate(config);
  require(!train.empty(), "training split is empty");
  require(!test.empty(), "test split is empty");
  TrainState state = initial_state(features.num_slots);
  TrainingRun run;
  run.method = method;
  const std::vector<std::size_t> to_eval = eval_steps(config.max_steps, config.eval_interval, window);
  auto next_eval = to_eval.begin();
  const std::span<const env::TaskInstance> abc = train.first(std::min<std::size_t>(3, train.size()));

  auto do_eval = [&] {
    EvalRecord rec;
    rec.step = state.step;
    rec.samples_seen = state.samples_seen;
    rec.test = game::aggregate(evaluate(state.params, test, eval, features, method));
    for (std::size_t i = 0; i < abc.size(); ++i) {
      rec.train_abc[i] = game::aggregate(evaluate(state.params, abc.subspan(i, 1), eval, features, method)).accuracy();
    }
    run.evals.push_back(std::move(rec));
  };

  for (std::size_t step = 0; step <= config.max_steps; ++step) {
    if (next_eval != to_eval.end() && *next_eval == step) {
      do_eval();
      ++next_eval;
    }
    if (step == config.max_steps) break;
    std::vector<env::TaskInstance> batch;
    for (std::size_t i : batch_indices(config.seed, step, train.size(), config.batch_tasks)) batch.push_back(train[i]);
    const StepMetrics m = train_step(state, batch, config, features, method);
    StepRecord r;
    r.step = m.step;
    r.eta = m.eta;
    r.samples_seen = state.samples_seen;
    r.transitions = m.transitions;
    r.sac_rate = m.sac_rate;
    r.batch_accuracy = m.batch_accuracy;
    r.histogram = m.histogram;
    r.verifier_loss = m.gradients.verifier_loss;
    r.generator_loss = m.gradients.generator_loss;
    r.verifier_kl = m.gradients.verifier_kl;
    r.generator_kl = m.gradients.generator_kl;
    r.verifier_groups = m.gradients.verifier_groups;
    r.action_groups = m.gradients.action_groups;
    r.proposal_groups = m.gradients.proposal_groups;
    r.revision_groups = m.gradients.revision_groups;
    for (policy::HeadId id : policy::kAllHeads) {
      r.grad_norm[static_cast<std::size_t>(id)] = std::sqrt(m.gradients.grad.head(id).squared_norm());
    }
    run.steps.push_back(std::move(r));
  }
  run.final_params = std::move(state.params);
  return run;
}

}  // namespace dpa::train
