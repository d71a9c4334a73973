#include <gtest/gtest.h>

#include <cmath>

#include "common/errors.hpp"
#include "env/corpus_io.hpp"
#include "env/features.hpp"
#include "sac/sac.hpp"

namespace dpa::env {
namespace {

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// Verifier features of every candidate of every unit, labelled c_sac.
std::vector<Sample> verifier_samples(const std::vector<TaskInstance>& tasks, const FeatureConfig& fc) {
  std::vector<Sample> out;
  for (const TaskInstance& t : tasks) {
    DecisionContext ctx(t);
    while (!ctx.terminal()) {
      const CandidateSet c = candidate_set(t, ctx.unit_index(), fc.num_slots - 1);
      for (Cents v : c.values) {
        out.push_back({featurize(fc, ctx, RoleTag::kVerifier, v).values,
                       1 - score_correct(v, t, ctx.unit_index())});
      }
      ctx = advance(ctx, oracle_value(t, ctx.unit_index()));
    }
  }
  return out;
}

// Held-out balanced accuracy of a logistic regression fit by gradient descent.
double probe_accuracy(const std::vector<Sample>& train, const std::vector<Sample>& test) {
  std::vector<double> w(train.front().x.size(), 0.0);
  for (int epoch = 0; epoch < 300; ++epoch) {
    std::vector<double> g(w.size(), 0.0);
    for (const Sample& s : train) {
      double z = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * s.x[i];
      const double p = 1.0 / (1.0 + std::exp(-z));
      for (std::size_t i = 0; i < w.size(); ++i) g[i] += (p - s.label) * s.x[i];
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= 0.5 * g[i] / static_cast<double>(train.size());
  }
  double positives = 0.0;
  for (const Sample& s : train) positives += s.label;
  // Posterior odds against prior odds: the balanced decision rule.
  const double threshold = std::log(positives / (static_cast<double>(train.size()) - positives));
  double hit[2] = {0, 0}, n[2] = {0, 0};
  for (const Sample& s : test) {
    double z = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * s.x[i];
    n[s.label] += 1;
    hit[s.label] += ((z > threshold) == (s.label == 1)) ? 1 : 0;
  }
  return 0.5 * (hit[0] / n[0] + hit[1] / n[1]);
}

TEST(Features, LengthsPerRole) {
  const FeatureConfig fc;
  const TaskInstance t = generate_task(3, DifficultyConfig{});
  const DecisionContext ctx(t);
  const Cents x = oracle_value(t, 1);
  const sac::SafetyAssuranceCase sac = sac::emit_sac(ctx, x, 0);
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kGeneratorProposal).values.size(),
            feature_length(RoleTag::kGeneratorProposal, fc.num_slots));
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kVerifier, x).values.size(), feature_length(RoleTag::kVerifier, fc.num_slots));
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kGeneratorRevision, x, &sac).values.size(),
            feature_length(RoleTag::kGeneratorRevision, fc.num_slots));
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kGeneratorAction, x, &sac, x + 1).values.size(),
            feature_length(RoleTag::kGeneratorAction, fc.num_slots));
}

TEST(Features, RoleTagRecorded) {
  const FeatureConfig fc;
  const TaskInstance t = generate_task(3, DifficultyConfig{});
  const DecisionContext ctx(t);
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kVerifier, 0).role_tag, RoleTag::kVerifier);
}

TEST(Features, MissingInputsRejected) {
  const FeatureConfig fc;
  const TaskInstance t = generate_task(3, DifficultyConfig{});
  const DecisionContext ctx(t);
  EXPECT_THROW(featurize(fc, ctx, RoleTag::kVerifier), Error);
  EXPECT_THROW(featurize(fc, ctx, RoleTag::kGeneratorAction, 0), Error);
}

TEST(Features, Deterministic) {
  const FeatureConfig fc;
  const TaskInstance t = generate_task(9, DifficultyConfig{});
  const DecisionContext ctx(t);
  EXPECT_EQ(featurize(fc, ctx, RoleTag::kVerifier, 123).values, featurize(fc, ctx, RoleTag::kVerifier, 123).values);
  FeatureConfig other = fc;
  other.noise_seed = 1;
  EXPECT_NE(featurize(fc, ctx, RoleTag::kVerifier, 123).values,
            featurize(other, ctx, RoleTag::kVerifier, 123).values);
}

TEST(Features, NoiselessMismatchIsExact) {
  FeatureConfig fc;
  fc.verifier_noise = 0.0;
  const TaskInstance t = generate_task(4, DifficultyConfig{});
  const Cents truth = oracle_value(t, 1);
  EXPECT_EQ(residual_features(fc, t, 1, truth, NoiseSalt::kVerifier).mismatch, 0.0);
  EXPECT_EQ(residual_features(fc, t, 1, truth, NoiseSalt::kVerifier).magnitude, 0.0);
  EXPECT_EQ(residual_features(fc, t, 1, truth + 100, NoiseSalt::kVerifier).mismatch, 1.0);
}

TEST(Features, SaltsGiveIndependentLooks) {
  const FeatureConfig fc;
  const TaskInstance t = generate_task(4, DifficultyConfig{});
  const Cents v = oracle_value(t, 1) + 5;
  EXPECT_NE(residual_features(fc, t, 1, v, NoiseSalt::kRevision).mismatch,
            residual_features(fc, t, 1, v, NoiseSalt::kAction).mismatch);
}

TEST(Features, TemperatureScalesValues) {
  FeatureConfig fc;
  const TaskInstance t = generate_task(4, DifficultyConfig{});
  const DecisionContext ctx(t);
  const std::vector<double> base = featurize(fc, ctx, RoleTag::kVerifier, 7).values;
  fc.temperature = 2.0;
  const std::vector<double> half = featurize(fc, ctx, RoleTag::kVerifier, 7).values;
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_DOUBLE_EQ(half[i], base[i] / 2.0);
}

TEST(Features, LogisticProbeLearnsAtDefaultNoiseAndDegradesWithNoise) {
  const std::vector<TaskInstance> train_tasks = generate_corpus(21, 40, DifficultyConfig{});
  const std::vector<TaskInstance> test_tasks = generate_corpus(22, 40, DifficultyConfig{});
  double previous = 1.0;
  for (double noise : {0.0, 0.5, 2.0}) {
    FeatureConfig fc;
    fc.verifier_noise = noise;
    const double acc = probe_accuracy(verifier_samples(train_tasks, fc), verifier_samples(test_tasks, fc));
    if (noise == 0.0) {
      EXPECT_GT(acc, 0.99);
    }
    if (noise == 0.5) {
      EXPECT_GT(acc, 0.75);
    }
    EXPECT_LE(acc, previous + 0.01);
    previous = acc;
  }
}

}  // namespace
}  // namespace dpa::env
