#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::train {
namespace {

using policy::HeadId;


double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Per-action advantages of a K-sample group in expected mode: the group
// statistics are replaced by their values under pi.
std::vector<double> expected_advantages(std::span<const double> probs, std::span<const double> rewards,
                                        double epsilon_a, AdvantageMode mode) {
  double m = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) m += probs[a] * rewards[a];
  double var = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) var += probs[a] * (rewards[a] - m) * (rewards[a] - m);
  const double scale = mode == AdvantageMode::kNormalized ? 1.0 / (std::sqrt(var) + epsilon_a) : 1.0;
  std::vector<double> adv(probs.size());
  for (std::size_t a = 0; a < probs.size(); ++a) adv[a] = (rewards[a] - m) * scale;
  return adv;
}

class Accumulator {
 public:
  Accumulator(StepGradients& out) : out_(out) {}

  void add(HeadId head, GradSource source, const LossGrad& lg) {
    out_.grad.head(head) += lg.reward_grad;
    out_.grad.head(head) += lg.kl_grad;
    out_.ledger.add(head, source, GradTerm::kReward, lg.reward_grad);
    out_.ledger.add(head, source, GradTerm::kKl, lg.kl_grad);
    ++out_.groups[static_cast<std::size_t>(head)];
  }

 private:
  StepGradients& out_;
};

// Group of `samples` drawn from one head at one context, each rewarded
// independently (proposal and revision groups).
LossGrad sample_group_loss(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                           std::span<const std::size_t> samples, std::span<const double> slot_rewards,
                           const TrainConfig& config, double beta) {
  const std::size_t n = head.cols();
  LossGrad total{0.0, 0.0, Matrix(head.rows(), n), Matrix(head.rows(), n)};
  if (config.gradient_mode == GradientMode::kExpected) {
    const std::vector<double> probs = policy::action_distribution(head, features, n);
    const std::vector<double> adv = expected_advantages(probs, slot_rewards, config.epsilon_a, config.advantage_mode);
    return pair_loss_expected(head, ref_head, features, adv, beta);
  }
  std::vector<double> rewards;
  for (std::size_t s : samples) rewards.push_back(slot_rewards[s]);
  const std::vector<double> adv = group_advantage(rewards, config.epsilon_a, config.advantage_mode);
  const double w = 1.0 / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LossGrad lg = pair_loss_sampled(head, ref_head, features, n, samples[i], adv[i], beta);
    total.loss += w * lg.loss;
    total.kl = lg.kl;
    total.reward_grad.axpy(w, lg.reward_grad);
    total.kl_grad.axpy(w, lg.kl_grad);
  }
  return total;
}

LossGrad paired_loss(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                     const PairedGroup& group, const TrainConfig& config, double beta) {
  if (config.gradient_mode == GradientMode::kExpected) {
    return pair_loss_expected(head, ref_head, features, group.advantages, beta);
  }
  return pair_loss_sampled(head, ref_head, features, 2, group.taken, group.advantages[group.taken], beta);
}

}  // namespace

double StepSchedule::at(std::size_t t) const {
  if (kind == Kind::kConstant) return eta;
  return c / (static_cast<double>(t) + t0);
}

std::string_view to_string(GradientMode m) { return m == GradientMode::kExpected ? "expected" : "sampled"; }
std::string_view to_string(AdvantageMode m) { return m == AdvantageMode::kCentered ? "centered" : "normalized"; }

std::string_view to_string(GradSource s) {
  switch (s) {
    case GradSource::kVerifier: return "verifier";
    case GradSource::kAction: return "action";
    case GradSource::kProposal: return "proposal";
    case GradSource::kRevision: return "revision";
  }
  return "?";
}

std::string_view to_string(Method m) { return m == Method::kDpaGrpo ? "dpa-grpo" : "grpo-generator-only"; }

void validate(const TrainConfig& c) {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kConfig, msg); };
  for (double b : {c.beta_v, c.beta_fx, c.beta_fz, c.beta_fa}) {
    if (!(b >= 0.0) || !std::isfinite(b)) bad("KL coefficients must be finite and >= 0");
  }
  if (!(c.epsilon_a >= 0.0)) bad("epsilon_a must be >= 0");
  if (c.schedule.kind == StepSchedule::Kind::kConstant && !(c.schedule.eta > 0.0)) bad("eta must be > 0");
  if (c.schedule.kind == StepSchedule::Kind::kRobbinsMonro && (!(c.schedule.c > 0.0) || !(c.schedule.t0 > 0.0))) {
    bad("Robbins-Monro schedule needs c > 0 and t0 > 0");
  }
  if (c.batch_tasks == 0) bad("batch_tasks must be >= 1");
  if (c.revision_k == 0) bad("revision_k must be >= 1");
  if (c.eval_interval == 0) bad("eval_interval must be >= 1");
  if (c.visitation_window == 0) bad("visitation_window must be >= 1");
  if (!(c.visitation_floor >= 0.0 && c.visitation_floor < 1.0)) bad("visitation_floor must be in [0, 1)");
  if (!(c.parse_failure_rate >= 0.0 && c.parse_failure_rate <= 1.0)) bad("parse_failure_rate must be in [0, 1]");
  if (c.threads == 0) bad("threads must be >= 1");
}

std::array<double, 2> paired_rewards_verifier(int c_sac, double sac_cost) {
  return {static_cast<double>(1 - c_sac), static_cast<double>(c_sac) - sac_cost};
}

std::array<double, 2> paired_rewards_generator(int s_x, int s_z) {
  return {static_cast<double>(s_x), static_cast<double>(s_z)};
}

std::vector<double> group_advantage(std::span<const double> rewards, double epsilon_a, AdvantageMode mode) {
  require(!rewards.empty(), "empty reward group");
  const double m = mean(rewards);
  std::vector<double> adv(rewards.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = rewards[i] - m;
    ss += adv[i] * adv[i];
  }
  if (mode == AdvantageMode::kCentered) return adv;
  const double denom = std::sqrt(ss / static_cast<double>(rewards.size())) + epsilon_a;
  if (denom == 0.0) return std::vector<double>(rewards.size(), 0.0);
  for (double& a : adv) a /= denom;
  return adv;
}

PairedGroup make_paired_group(HeadId head, const std::array<double, 2>& rewards, const std::vector<double>& probs,
                              std::size_t taken, double epsilon_a, AdvantageMode mode) {
  PairedGroup g;
  g.head = head;
  g.rewards = rewards;
  const std::vector<double> adv = group_advantage(rewards, epsilon_a, mode);
  g.advantages = {adv[0], adv[1]};
  g.old_logp = {std::log(probs[0]), std::log(probs[1])};
  g.taken = taken;
  return g;
}

Matrix LossGrad::total() const {
  Matrix t = reward_grad;
  t += kl_grad;
  return t;
}

LossGrad pair_loss_expected(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                            std::span<const double> advantages, double beta) {
  const std::size_t n = advantages.size();
  const std::vector<double> p = policy::action_distribution(head, features, n);
  LossGrad out;
  out.reward_grad = Matrix(head.rows(), head.cols());
  for (std::size_t a = 0; a < n; ++a) {
    out.loss -= p[a] * advantages[a];
    if (advantages[a] == 0.0) continue;
    out.reward_grad.axpy(-p[a] * advantages[a], policy::score(features, p, head.cols(), a));
  }
  policy::KlResult kl = policy::kl_to_reference(head, ref_head, features, n);
  out.kl = kl.value;
  out.loss += beta * kl.value;
  kl.grad *= beta;
  out.kl_grad = std::move(kl.grad);
  return out;
}

LossGrad pair_loss_sampled(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                           std::size_t n_actions, std::size_t chosen, double advantage, double beta) {
  const std::vector<double> p = policy::action_distribution(head, features, n_actions);
  const std::vector<double> q = policy::action_distribution(ref_head, features, n_actions);
  const double log_ratio = std::log(p[chosen]) - std::log(q[chosen]);
  const Matrix s = policy::score(features, p, head.cols(), chosen);
  LossGrad out;
  out.loss = -advantage * std::log(p[chosen]) + beta * log_ratio;
  out.kl = policy::categorical_kl(p, q);
  out.reward_grad = Matrix(head.rows(), head.cols());
  out.reward_grad.axpy(-advantage, s);
  out.kl_grad = Matrix(head.rows(), head.cols());
  out.kl_grad.axpy(beta * log_ratio, s);
  return out;
}

void SourceLedger::add(HeadId head, GradSource source, GradTerm term, const Matrix& g) {
  double m = 0.0;
  for (double v : g.data()) m += std::abs(v);
  mass[static_cast<std::size_t>(head)][static_cast<std::size_t>(source)][static_cast<std::size_t>(term)] += m;
}

double SourceLedger::at(HeadId head, GradSource source) const {
  const auto& cell = mass[static_cast<std::size_t>(head)][static_cast<std::size_t>(source)];
  return cell[0] + cell[1];
}

StepGradients compute_gradients(std::span<const game::Transition> batch, const policy::PolicyParams& params,
                                const policy::PolicyParams& ref, const TrainConfig& config,
                                const env::FeatureConfig& features, Method method, std::uint64_t proposal_seed) {
  StepGradients out;
  out.grad = policy::zeros_like(params);
  Accumulator acc(out);
  const std::size_t slots = features.num_slots;
  double gen_loss = 0.0, gen_kl = 0.0;

  for (const game::Transition& tr : batch) {
    if (method == Method::kDpaGrpo) {
      const auto& fv = tr.verifier_features.values;
      const std::vector<double> pv = policy::action_distribution(params.verifier.intervene_head, fv, 2);
      const PairedGroup vg =
          make_paired_group(HeadId::kIntervene, paired_rewards_verifier(tr.c_sac, config.sac_cost), pv,
                            static_cast<std::size_t>(tr.verifier_action), config.epsilon_a, config.advantage_mode);
      const LossGrad lv =
          paired_loss(params.verifier.intervene_head, ref.verifier.intervene_head, fv, vg, config, config.beta_v);
      acc.add(HeadId::kIntervene, GradSource::kVerifier, lv);
      out.verifier_loss += lv.loss;
      out.verifier_kl += lv.kl;
      ++out.verifier_groups;

      if (tr.verifier_action == game::VerifierAction::kSac) {
        // The template head has no reward; only its KL anchor applies.
        const std::vector<double> zero(sac::kNumDrawableTemplates, 0.0);
        const LossGrad lt =
            config.gradient_mode == GradientMode::kExpected
                ? pair_loss_expected(params.verifier.template_head, ref.verifier.template_head, fv, zero, config.beta_v)
                : pair_loss_sampled(params.verifier.template_head, ref.verifier.template_head, fv,
                                    sac::kNumDrawableTemplates, *tr.template_draw, 0.0, config.beta_v);
        acc.add(HeadId::kTemplate, GradSource::kVerifier, lt);

        const auto& fa = tr.action_features->values;
        const std::vector<double> pa = policy::action_distribution(params.generator.action_head, fa, 2);
        const PairedGroup ag =
            make_paired_group(HeadId::kAction, paired_rewards_generator(tr.s_x, *tr.s_z), pa,
                              static_cast<std::size_t>(tr.generator_action), config.epsilon_a, config.advantage_mode);
        const LossGrad la =
            paired_loss(params.generator.action_head, ref.generator.action_head, fa, ag, config, config.beta_fa);
        acc.add(HeadId::kAction, GradSource::kAction, la);
        gen_loss += la.loss;
        gen_kl += la.kl;
        ++out.action_groups;

        std::vector<std::size_t> valid;
        for (const game::RevisionCandidate& c : tr.revision_candidates) {
          if (c.valid) valid.push_back(c.slot);
        }
        if (!valid.empty()) {
          std::vector<double> slot_rewards(slots);
          for (std::size_t s = 0; s < slots; ++s) {
            slot_rewards[s] = env::score_correct(tr.candidates[s], tr.context.task(), tr.context.unit_index());
          }
          const LossGrad lr = sample_group_loss(params.generator.revision_head, ref.generator.revision_head,
                                                tr.revision_features->values, valid, slot_rewards, config,
                                                config.beta_fz);
          acc.add(HeadId::kRevision, GradSource::kRevision, lr);
          gen_loss += lr.loss;
          gen_kl += lr.kl;
          ++out.revision_groups;
        }
      }
    }

    const auto& fx = tr.proposal_features.values;
    std::vector<double> slot_rewards(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      slot_rewards[s] = env::score_correct(tr.candidates[s], tr.context.task(), tr.context.unit_index());
    }
    std::array<std::size_t, 2> samples{};
    if (config.gradient_mode == GradientMode::kSampled) {
      const std::vector<double> px = policy::action_distribution(params.generator.proposal_head, fx, slots);
      Rng rng(mix_seed({proposal_seed, tr.context.task().seed, static_cast<std::uint64_t>(tr.context.unit_index())}));
      samples = {rng.categorical(px), rng.categorical(px)};
    }
    const LossGrad lx = sample_group_loss(params.generator.proposal_head, ref.generator.proposal_head, fx, samples,
                                          slot_rewards, config, config.beta_fx);
    acc.add(HeadId::kProposal, GradSource::kProposal, lx);
    gen_loss += lx.loss;
    gen_kl += lx.kl;
    ++out.proposal_groups;
  }

  for (HeadId id : policy::kAllHeads) {
    const std::size_t n = out.groups[static_cast<std::size_t>(id)];
    if (n > 1) out.grad.head(id) *= 1.0 / static_cast<double>(n);
  }
  if (out.verifier_groups > 0) {
    out.verifier_loss /= static_cast<double>(out.verifier_groups);
    out.verifier_kl /= static_cast<double>(out.verifier_groups);
  }
  const std::size_t gen_groups = out.action_groups + out.revision_groups + out.proposal_groups;
  if (gen_groups > 0) {
    out.generator_loss = gen_loss / static_cast<double>(gen_groups);
    out.generator_kl = gen_kl / static_cast<double>(gen_groups);
  }
  return out;
}

void apply_gradients(policy::PolicyParams& params, const StepGradients& g, double eta, Method method) {
  auto update = [&](HeadId id) {
    const Matrix& grad = g.grad.head(id);
    if (!grad.all_finite()) {
      fail(ErrorCode::kNumeric, fmt::format("non-finite gradient in the {} head", policy::to_string(id)));
    }
    params.head(id).axpy(-eta, grad);
    if (!params.head(id).all_finite()) {
      fail(ErrorCode::kNumeric, fmt::format("non-finite weights in the {} head after update", policy::to_string(id)));
    }
  };
  if (method == Method::kDpaGrpo) {
    update(HeadId::kIntervene);
    update(HeadId::kTemplate);
    update(HeadId::kProposal);
    update(HeadId::kRevision);
    update(HeadId::kAction);
  } else {
    update(HeadId::kProposal);
  }
}

TrainState initial_state(std::size_t num_slots) {
  TrainState s;
  s.params = policy::zero_params(num_slots);
  s.reference = policy::snapshot(s.params);
  return s;
}

game::RolloutConfig training_rollout(const TrainConfig& config, const env::FeatureConfig& features, Method method) {
  game::RolloutConfig rc;
  rc.features = features;
  rc.revision_k = config.revision_k;
  rc.oracle_selection = true;
  rc.greedy = false;
  rc.parse_failure_rate = config.parse_failure_rate;
  if (method == Method::kGeneratorOnly) rc.force_verifier = game::VerifierAction::kNoSac;
  return rc;
}

StepMetrics train_step(TrainState& state, std::span<const env::TaskInstance> batch, const TrainConfig& config,
                       const env::FeatureConfig& features, Method method) {
  require(!batch.empty(), "empty training batch");
  const game::RolloutConfig rc = training_rollout(config, features, method);
  const std::uint64_t rollout_seed = mix_seed({config.seed, state.step, hash_string("rollout")});
  const std::uint64_t proposal_seed = mix_seed({config.seed, state.step, hash_string("proposal")});
  const std::vector<game::Transition> transitions =
      game::rollout_tasks(batch, state.params, rc, rollout_seed, config.threads);

  StepMetrics m;
  m.step = state.step;
  m.eta = config.schedule.at(state.step);
  m.transitions = transitions.size();
  m.histogram = game::aggregate(transitions);
  m.batch_accuracy = m.histogram.accuracy();
  std::size_t sac = 0;
  for (const game::Transition& tr : transitions) sac += tr.verifier_action == game::VerifierAction::kSac ? 1 : 0;
  m.sac_rate = static_cast<double>(sac) / static_cast<double>(transitions.size());

  m.gradients = compute_gradients(transitions, state.params, *state.reference, config, features, method, proposal_seed);
  apply_gradients(state.params, m.gradients, m.eta, method);

  if (method == Method::kDpaGrpo) {
    state.sac_rates.push_back(m.sac_rate);
    const std::size_t w = config.visitation_window;
    if (state.sac_rates.size() >= w) {
      const double recent = mean(std::span<const double>(state.sac_rates).last(w));
      if (recent < config.visitation_floor) {
        fail(ErrorCode::kNumeric,
             fmt::format("SAC-branch visitation {:.4g} over the last {} steps fell below the floor {:.4g} at step {}",
                         recent, w, config.visitation_floor, state.step));
      }
    }
  }
  ++state.step;
  state.samples_seen += batch.size();
  return m;
}

}  // namespace dpa::train
