#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "common/errors.hpp"
#include "env/corpus_io.hpp"
#include "policy/policy.hpp"
#include "test_util.hpp"
#include "train/train_loop.hpp"
#include "train/trainer.hpp"

namespace dpa::train {
namespace {

using policy::HeadId;
using testing::finite_difference;
using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;

TEST(Advantage, DistinctBinaryRewards) {
  const std::vector<double> a = group_advantage(std::vector<double>{1.0, 0.0}, 1e-6);
  EXPECT_DOUBLE_EQ(a[0], 0.5 / (0.5 + 1e-6));
  EXPECT_DOUBLE_EQ(a[1], -0.5 / (0.5 + 1e-6));
  EXPECT_NEAR(a[0], 0.999998, 1e-6);
  EXPECT_EQ(a[0], -a[1]);
}

TEST(Advantage, NonBinaryRewardsWithoutGuard) {
  const std::vector<double> a = group_advantage(std::vector<double>{0.3, 0.7}, 0.0);
  EXPECT_NEAR(a[0], -1.0, 1e-12);
  EXPECT_NEAR(a[1], 1.0, 1e-12);
}

TEST(Advantage, EqualRewardsGiveZero) {
  for (double eps : {0.0, 1e-6}) {
    const std::vector<double> a = group_advantage(std::vector<double>{0.4, 0.4}, eps);
    EXPECT_EQ(a[0], 0.0);
    EXPECT_EQ(a[1], 0.0);
  }
}

TEST(Advantage, CenteredMode) {
  const std::vector<double> a =
      group_advantage(std::vector<double>{1.0, 0.0, 0.5}, 1e-6, AdvantageMode::kCentered);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], -0.5);
  EXPECT_DOUBLE_EQ(a[2], 0.0);
}

TEST(PairedRewards, VerifierAndGenerator) {
  EXPECT_EQ(paired_rewards_verifier(1), (std::array<double, 2>{0.0, 1.0}));
  EXPECT_EQ(paired_rewards_verifier(0), (std::array<double, 2>{1.0, 0.0}));
  EXPECT_EQ(paired_rewards_verifier(1, 0.25), (std::array<double, 2>{0.0, 0.75}));
  EXPECT_EQ(paired_rewards_generator(1, 0), (std::array<double, 2>{1.0, 0.0}));
  EXPECT_EQ(paired_rewards_generator(0, 1), (std::array<double, 2>{0.0, 1.0}));
}

TEST(PairLoss, ExpectedMatchesFiniteDifferences) {
  Rng rng(21);
  for (int draw = 0; draw < 64; ++draw) {
    const std::size_t rows = 2 + draw % 5, actions = 2 + draw % 4;
    const Matrix head = random_matrix(rows, actions, rng);
    const Matrix ref = random_matrix(rows, actions, rng);
    const std::vector<double> f = random_vector(rows, rng);
    const std::vector<double> adv = random_vector(actions, rng);
    const double beta = 0.04 + rng.uniform();
    const LossGrad lg = pair_loss_expected(head, ref, f, adv, beta);
    auto loss = [&](const Matrix& h) {
      const std::vector<double> p = policy::action_distribution(h, f, actions);
      double l = 0.0;
      for (std::size_t a = 0; a < actions; ++a) l -= p[a] * adv[a];
      return l + beta * policy::categorical_kl(p, policy::action_distribution(ref, f, actions));
    };
    EXPECT_NEAR(lg.loss, loss(head), 1e-12);
    EXPECT_LT(relative_error(lg.total(), finite_difference(loss, head)), 1e-6);
  }
}

TEST(PairLoss, SampledIsGradientOfItsSurrogate) {
  Rng rng(22);
  for (int draw = 0; draw < 64; ++draw) {
    const std::size_t rows = 2 + draw % 5, actions = 2 + draw % 4;
    const Matrix head = random_matrix(rows, actions, rng);
    const Matrix ref = random_matrix(rows, actions, rng);
    const std::vector<double> f = random_vector(rows, rng);
    const std::size_t chosen = static_cast<std::size_t>(draw) % actions;
    const double adv = 2.0 * rng.uniform() - 1.0, beta = 0.04 + rng.uniform();
    const double log_ref = std::log(policy::action_distribution(ref, f, actions)[chosen]);
    // -A log pi(a) + beta/2 (log pi(a) - log ref(a))^2
    auto surrogate = [&](const Matrix& h) {
      const double lp = std::log(policy::action_distribution(h, f, actions)[chosen]);
      return -adv * lp + 0.5 * beta * (lp - log_ref) * (lp - log_ref);
    };
    const LossGrad lg = pair_loss_sampled(head, ref, f, actions, chosen, adv, beta);
    EXPECT_LT(relative_error(lg.total(), finite_difference(surrogate, head)), 1e-6);
  }
}

TEST(PairLoss, SampledExpectationEqualsExpected) {
  Rng rng(23);
  for (int draw = 0; draw < 20; ++draw) {
    const std::size_t rows = 3, actions = 2 + draw % 3;
    const Matrix head = random_matrix(rows, actions, rng);
    const Matrix ref = random_matrix(rows, actions, rng);
    const std::vector<double> f = random_vector(rows, rng);
    const std::vector<double> adv = random_vector(actions, rng);
    const double beta = 0.3;
    const std::vector<double> p = policy::action_distribution(head, f, actions);
    Matrix mean(rows, actions);
    for (std::size_t a = 0; a < actions; ++a) {
      mean.axpy(p[a], pair_loss_sampled(head, ref, f, actions, a, adv[a], beta).total());
    }
    EXPECT_LT(relative_error(mean, pair_loss_expected(head, ref, f, adv, beta).total()), 1e-10);
  }
}

TEST(Schedule, ConstantAndRobbinsMonro) {
  StepSchedule s;
  s.eta = 0.3;
  EXPECT_EQ(s.at(0), 0.3);
  EXPECT_EQ(s.at(100), 0.3);
  s.kind = StepSchedule::Kind::kRobbinsMonro;
  s.c = 0.5;
  s.t0 = 10;
  EXPECT_DOUBLE_EQ(s.at(0), 0.05);
  EXPECT_DOUBLE_EQ(s.at(90), 0.005);
}

TEST(Config, ValidateRejectsBadValues) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  c.batch_tasks = 0;
  EXPECT_THROW(validate(c), Error);
  c = TrainConfig{};
  c.beta_v = -1.0;
  EXPECT_THROW(validate(c), Error);
  c = TrainConfig{};
  c.revision_k = 0;
  EXPECT_THROW(validate(c), Error);
}

TEST(Batches, DeterministicDistinctInRange) {
  const std::vector<std::size_t> a = batch_indices(3, 7, 80, 8);
  EXPECT_EQ(a, batch_indices(3, 7, 80, 8));
  EXPECT_NE(a, batch_indices(3, 8, 80, 8));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 8u);
  for (std::size_t i : a) EXPECT_LT(i, 80u);
  EXPECT_EQ(batch_indices(1, 0, 5, 8).size(), 5u);
}

TEST(EvalSteps, WindowsIntervalsAndEnds) {
  EXPECT_EQ(eval_steps(20, 5, 2), (std::vector<std::size_t>{0, 1, 5, 10, 15, 19, 20}));
  EXPECT_EQ(eval_steps(0, 5, 5), (std::vector<std::size_t>{0}));
}

struct Scenario {
  env::FeatureConfig features;
  std::vector<env::TaskInstance> train;
  std::vector<env::TaskInstance> test;
  TrainConfig config;
};

Scenario small_scenario() {
  Scenario s;
  const env::DifficultyConfig d;
  s.features.num_slots = d.num_distractors + 1;
  s.train = env::generate_corpus(31, 16, d);
  s.test = env::generate_corpus(32, 6, d);
  s.config.max_steps = 6;
  s.config.eval_interval = 3;
  return s;
}

TEST(Routing, EachSourceFeedsOnlyItsOwnHeads) {
  Scenario s = small_scenario();
  TrainState st = initial_state(s.features.num_slots);
  const game::RolloutConfig rc = training_rollout(s.config, s.features, Method::kDpaGrpo);
  const std::vector<game::Transition> batch = game::rollout_tasks(s.train, st.params, rc, 4);
  const StepGradients g = compute_gradients(batch, st.params, *st.reference, s.config, s.features, Method::kDpaGrpo, 9);
  EXPECT_GT(g.verifier_groups, 0u);
  EXPECT_GT(g.action_groups, 0u);
  EXPECT_GT(g.ledger.at(HeadId::kIntervene, GradSource::kVerifier), 0.0);
  for (HeadId h : policy::kAllHeads) {
    if (policy::role_of(h) == policy::Role::kVerifier) {
      EXPECT_EQ(g.ledger.at(h, GradSource::kAction), 0.0) << policy::to_string(h);
      EXPECT_EQ(g.ledger.at(h, GradSource::kProposal), 0.0) << policy::to_string(h);
      EXPECT_EQ(g.ledger.at(h, GradSource::kRevision), 0.0) << policy::to_string(h);
    } else {
      EXPECT_EQ(g.ledger.at(h, GradSource::kVerifier), 0.0) << policy::to_string(h);
    }
  }
  EXPECT_GT(g.ledger.at(HeadId::kAction, GradSource::kAction), 0.0);
  EXPECT_GT(g.ledger.at(HeadId::kProposal, GradSource::kProposal), 0.0);
  EXPECT_EQ(g.ledger.at(HeadId::kProposal, GradSource::kAction), 0.0);
  EXPECT_EQ(g.ledger.at(HeadId::kAction, GradSource::kProposal), 0.0);
}

TEST(Routing, BaselineUpdatesOnlyTheProposalHead) {
  Scenario s = small_scenario();
  TrainState st = initial_state(s.features.num_slots);
  for (int i = 0; i < 3; ++i) train_step(st, s.train, s.config, s.features, Method::kGeneratorOnly);
  const policy::PolicyParams zero = policy::zero_params(s.features.num_slots);
  EXPECT_NE(st.params.generator.proposal_head, zero.generator.proposal_head);
  EXPECT_EQ(st.params.generator.revision_head, zero.generator.revision_head);
  EXPECT_EQ(st.params.generator.action_head, zero.generator.action_head);
  EXPECT_EQ(st.params.verifier, zero.verifier);
}

TEST(Routing, MethodsShareProposalTrajectory) {
  Scenario s = small_scenario();
  TrainState dpa = initial_state(s.features.num_slots);
  TrainState base = initial_state(s.features.num_slots);
  for (std::size_t step = 0; step < 5; ++step) {
    std::vector<env::TaskInstance> batch;
    for (std::size_t i : batch_indices(1, step, s.train.size(), 4)) batch.push_back(s.train[i]);
    train_step(dpa, batch, s.config, s.features, Method::kDpaGrpo);
    train_step(base, batch, s.config, s.features, Method::kGeneratorOnly);
  }
  EXPECT_EQ(dpa.params.generator.proposal_head, base.params.generator.proposal_head);
  EXPECT_NE(dpa.params.verifier, base.params.verifier);
}

TEST(Update, NonFiniteGradientIsNumericError) {
  policy::PolicyParams p = policy::zero_params(4);
  StepGradients g;
  g.grad = policy::zeros_like(p);
  g.grad.generator.action_head(0, 0) = std::nan("");
  try {
    apply_gradients(p, g, 0.1, Method::kDpaGrpo);
    FAIL() << "expected a numeric error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(Monitor, CollapsedSacVisitationAborts) {
  Scenario s = small_scenario();
  s.config.visitation_floor = 0.5;
  s.config.visitation_window = 2;
  TrainState st = initial_state(s.features.num_slots);
  st.params.verifier.intervene_head(0, 0) = 50.0;  // bias feature, NS column
  EXPECT_NO_THROW(train_step(st, s.train, s.config, s.features, Method::kDpaGrpo));
  try {
    train_step(st, s.train, s.config, s.features, Method::kDpaGrpo);
    FAIL() << "expected the visitation monitor to fire";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(Loop, ZeroStepsHasOnlyTheInitialEvaluation) {
  Scenario s = small_scenario();
  s.config.max_steps = 0;
  const TrainingRun run = train_loop(s.config, EvalConfig{}, s.features, s.train, s.test, Method::kDpaGrpo);
  EXPECT_TRUE(run.steps.empty());
  ASSERT_EQ(run.evals.size(), 1u);
  EXPECT_EQ(run.evals[0].step, 0u);
}

TEST(Loop, BaselineEvaluationIsNoSacOnly) {
  Scenario s = small_scenario();
  const TrainingRun run = train_loop(s.config, EvalConfig{}, s.features, s.train, s.test, Method::kGeneratorOnly);
  for (const EvalRecord& e : run.evals) {
    EXPECT_EQ(e.test.count(game::CaseLabel::kC1) + e.test.count(game::CaseLabel::kC4), e.test.total);
  }
}

TEST(Loop, Deterministic) {
  Scenario s = small_scenario();
  const TrainingRun a = train_loop(s.config, EvalConfig{}, s.features, s.train, s.test, Method::kDpaGrpo);
  const TrainingRun b = train_loop(s.config, EvalConfig{}, s.features, s.train, s.test, Method::kDpaGrpo);
  EXPECT_EQ(a.final_params, b.final_params);
  s.config.threads = 3;
  EvalConfig e;
  e.threads = 3;
  const TrainingRun c = train_loop(s.config, e, s.features, s.train, s.test, Method::kDpaGrpo);
  EXPECT_EQ(a.final_params, c.final_params);
}

}  // namespace
}  // namespace dpa::train
