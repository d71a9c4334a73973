#include "game/game.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "common/errors.hpp"

namespace dpa::game {
namespace {

using env::RoleTag;
using policy::action_distribution;

std::size_t draw(std::span<const double> probs, bool greedy, Rng& rng) {
  return greedy ? policy::argmax_lowest(probs) : rng.categorical(probs);
}

}  // namespace

std::string_view to_string(VerifierAction y) { return y == VerifierAction::kSac ? "SAC" : "NS"; }

std::string_view to_string(GeneratorAction a) { return a == GeneratorAction::kRevise ? "REVISE" : "KEEP"; }

std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::kC1: return "C1";
    case CaseLabel::kC2: return "C2";
    case CaseLabel::kC3: return "C3";
    case CaseLabel::kC4: return "C4";
    case CaseLabel::kC5A: return "C5A";
    case CaseLabel::kC5B: return "C5B";
    case CaseLabel::kC6A: return "C6A";
    case CaseLabel::kC6B: return "C6B";
  }
  return "?";
}

void check_invariants(const Transition& tr) {
  auto bad = [&](std::string_view what) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("transition {}/{}: {}", tr.context.task().id, tr.context.unit_index(), what));
  };
  if (tr.c_sac != 1 - tr.s_x) bad("c_sac != 1 - S_x");
  if (tr.verifier_action == VerifierAction::kNoSac) {
    if (tr.sac || tr.revision || tr.s_z) bad("NS transition carries SAC fields");
    if (tr.generator_action != GeneratorAction::kKeep) bad("NS transition with REVISE");
    if (tr.submitted != tr.proposal) bad("NS transition submits something other than x");
  } else {
    if (!tr.sac || !tr.revision || !tr.s_z) bad("SAC transition missing SAC fields");
    const Cents expected = tr.generator_action == GeneratorAction::kKeep ? tr.proposal : *tr.revision;
    if (tr.submitted != expected) bad("submitted value does not follow the generator action");
  }
}

RevisionOutcome best_of_k_revision(const policy::PolicyParams& params, const RolloutConfig& config,
                                   const env::DecisionContext& context, const sac::SafetyAssuranceCase& sac,
                                   Cents proposal, std::span<const double> revision_features,
                                   std::span<const Cents> candidates, Rng& rng) {
  require(config.revision_k >= 1, "revision K must be at least 1");
  std::vector<double> probs = action_distribution(params.generator.revision_head, revision_features, candidates.size());
  // A revision proposes a different value: the proposal's slot is masked out
  // and the rest renormalized.
  if (candidates.size() > 1) {
    double kept = 1.0;
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      if (candidates[s] == proposal) {
        kept -= probs[s];
        probs[s] = 0.0;
      }
    }
    const bool all_mass_on_proposal = !(kept > 1e-300);
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      if (candidates[s] == proposal) continue;
      probs[s] = all_mass_on_proposal ? 1.0 : probs[s] / kept;
    }
    if (all_mass_on_proposal) {
      const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
      for (double& p : probs) p /= total;
    }
  }
  const std::size_t k = config.greedy ? 1 : config.revision_k;
  RevisionOutcome out;
  out.candidates.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    RevisionCandidate c;
    c.slot = draw(probs, config.greedy, rng);
    c.value = candidates[c.slot];
    c.prob = probs[c.slot];
    c.correct = env::score_correct(c.value, context.task(), context.unit_index());
    if (config.parse_failure_rate > 0.0) c.valid = !rng.bernoulli(config.parse_failure_rate);
    out.candidates.push_back(c);
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    const RevisionCandidate& c = out.candidates[i];
    if (!c.valid) continue;
    if (!best) {
      best = i;
      continue;
    }
    const RevisionCandidate& b = out.candidates[*best];
    if (config.oracle_selection && c.correct != b.correct) {
      if (c.correct > b.correct) best = i;
      continue;
    }
    if (c.prob > b.prob) best = i;
  }
  if (best) {
    out.value = out.candidates[*best].value;
    out.slot = out.candidates[*best].slot;
  } else {
    out.fallback = true;
    out.value = sac.suggested_correction.value_or(proposal);
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      if (candidates[s] == out.value) out.slot = s;
    }
  }
  return out;
}

Transition rollout_unit(const env::DecisionContext& context, const policy::PolicyParams& params,
                        const RolloutConfig& config, Rng& rng) {
  require(!context.terminal(), "rollout past the horizon");
  const env::TaskInstance& task = context.task();
  const std::size_t unit = context.unit_index();
  const std::size_t slots = config.features.num_slots;

  Transition tr(context);
  tr.candidates = env::candidate_set(task, unit, slots - 1).values;
  require(tr.candidates.size() == slots, "candidate set size does not match the slot count");

  tr.proposal_features = env::featurize(config.features, context, RoleTag::kGeneratorProposal);
  const std::vector<double> px = action_distribution(params.generator.proposal_head, tr.proposal_features.values, slots);
  tr.proposal_slot = draw(px, config.greedy, rng);
  tr.proposal = tr.candidates[tr.proposal_slot];
  tr.logp.proposal = std::log(px[tr.proposal_slot]);
  tr.s_x = env::score_correct(tr.proposal, task, unit);
  tr.c_sac = sac::sac_correct_label(tr.s_x);

  tr.verifier_features = env::featurize(config.features, context, RoleTag::kVerifier, tr.proposal);
  const std::vector<double> pv = action_distribution(params.verifier.intervene_head, tr.verifier_features.values, 2);
  const std::size_t y = config.force_verifier ? static_cast<std::size_t>(*config.force_verifier)
                                              : draw(pv, config.greedy, rng);
  tr.verifier_action = static_cast<VerifierAction>(y);
  tr.logp.verifier = std::log(pv[y]);

  if (tr.verifier_action == VerifierAction::kNoSac) {
    tr.generator_action = GeneratorAction::kKeep;
    tr.submitted = tr.proposal;
    return tr;
  }

  const std::vector<double> pt = action_distribution(params.verifier.template_head, tr.verifier_features.values,
                                                     sac::kNumDrawableTemplates);
  const std::size_t tmpl = draw(pt, config.greedy, rng);
  tr.template_draw = tmpl;
  tr.logp.template_draw = std::log(pt[tmpl]);
  tr.sac = sac::emit_sac(context, tr.proposal, tmpl);
  tr.sac_score = sac::score_sac(*tr.sac, context, tr.proposal);

  tr.revision_features = env::featurize(config.features, context, RoleTag::kGeneratorRevision, tr.proposal, &*tr.sac);
  RevisionOutcome rev =
      best_of_k_revision(params, config, context, *tr.sac, tr.proposal, tr.revision_features->values, tr.candidates, rng);
  tr.revision = rev.value;
  tr.revision_slot = rev.slot;
  tr.revision_candidates = std::move(rev.candidates);
  tr.revision_fallback = rev.fallback;
  tr.s_z = env::score_correct(rev.value, task, unit);
  if (rev.slot) {
    const std::vector<double> pz =
        action_distribution(params.generator.revision_head, tr.revision_features->values, slots);
    tr.logp.revision = std::log(pz[*rev.slot]);
  }

  tr.action_features =
      env::featurize(config.features, context, RoleTag::kGeneratorAction, tr.proposal, &*tr.sac, tr.revision);
  const std::vector<double> pa = action_distribution(params.generator.action_head, tr.action_features->values, 2);
  const std::size_t a = config.force_action ? static_cast<std::size_t>(*config.force_action)
                                            : draw(pa, config.greedy, rng);
  tr.generator_action = static_cast<GeneratorAction>(a);
  tr.logp.action = std::log(pa[a]);
  tr.submitted = tr.generator_action == GeneratorAction::kKeep ? tr.proposal : *tr.revision;
  return tr;
}

std::vector<Transition> rollout_task(const env::TaskInstance& task, const policy::PolicyParams& params,
                                     const RolloutConfig& config, Rng& rng) {
  std::vector<Transition> out;
  out.reserve(task.horizon());
  env::DecisionContext ctx(task);
  while (!ctx.terminal()) {
    out.push_back(rollout_unit(ctx, params, config, rng));
    ctx = advance(ctx, out.back().submitted);
  }
  return out;
}

std::vector<Transition> rollout_tasks(std::span<const env::TaskInstance> tasks, const policy::PolicyParams& params,
                                      const RolloutConfig& config, std::uint64_t seed, std::size_t threads) {
  std::vector<std::vector<Transition>> per_task(tasks.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < tasks.size(); i += stride) {
      Rng rng(mix_seed({seed, tasks[i].seed}));
      per_task[i] = rollout_task(tasks[i], params, config, rng);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, tasks.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<Transition> out;
  for (std::vector<Transition>& part : per_task) {
    for (Transition& tr : part) out.push_back(std::move(tr));
  }
  return out;
}

CaseLabel classify_case(int s_x, VerifierAction y, GeneratorAction a, std::optional<int> s_z) {
  if (y == VerifierAction::kNoSac) return s_x == 1 ? CaseLabel::kC1 : CaseLabel::kC4;
  if (s_x == 1) return a == GeneratorAction::kRevise ? CaseLabel::kC2 : CaseLabel::kC3;
  const int z = s_z.value_or(0);
  if (a == GeneratorAction::kRevise) return z == 1 ? CaseLabel::kC5A : CaseLabel::kC5B;
  return z == 1 ? CaseLabel::kC6B : CaseLabel::kC6A;
}

CaseLabel classify_case(const Transition& tr) {
  return classify_case(tr.s_x, tr.verifier_action, tr.generator_action, tr.s_z);
}

void CaseHistogram::add(const Transition& tr) {
  const CaseLabel c = classify_case(tr);
  ++counts[static_cast<std::size_t>(c)];
  ++total;
  submitted_correct += static_cast<std::size_t>(
      env::score_correct(tr.submitted, tr.context.task(), tr.context.unit_index()));
  if (c == CaseLabel::kC2 && tr.s_z.value_or(0) == 1) ++c2_revision_correct;
}

double CaseHistogram::rate(CaseLabel c) const {
  return total == 0 ? 0.0 : static_cast<double>(count(c)) / static_cast<double>(total);
}

double CaseHistogram::accuracy() const {
  return total == 0 ? 0.0 : static_cast<double>(submitted_correct) / static_cast<double>(total);
}

double CaseHistogram::composed_accuracy() const {
  if (total == 0) return 0.0;
  const std::size_t n = count(CaseLabel::kC1) + count(CaseLabel::kC3) + count(CaseLabel::kC5A) + c2_revision_correct;
  return static_cast<double>(n) / static_cast<double>(total);
}

CaseHistogram aggregate(std::span<const Transition> batch) {
  require(!batch.empty(), "cannot aggregate an empty batch");
  CaseHistogram h;
  for (const Transition& tr : batch) h.add(tr);
  return h;
}

}  // namespace dpa::game
