#include <gtest/gtest.h>

#include <cmath>

#include "common/errors.hpp"
#include "env/features.hpp"
#include "policy/checkpoint.hpp"
#include "policy/policy.hpp"
#include "test_util.hpp"

namespace dpa::policy {
namespace {

using testing::finite_difference;
using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;

TEST(Softmax, HandExample) {
  const std::vector<double> p = softmax(std::vector<double>{std::log(3.0), 0.0});
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
}

TEST(Softmax, StableForLargeLogits) {
  const std::vector<double> p = softmax(std::vector<double>{1000.0, 0.0, -1000.0});
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_TRUE(std::isfinite(p[2]));
}

TEST(Score, UniformTwoActions) {
  const std::vector<double> f = {2.0, -1.0};
  const Matrix s = score(f, std::vector<double>{0.5, 0.5}, 2, 0);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(s(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(s(1, 1), 0.5);
}

TEST(Kl, HandExample) {
  EXPECT_NEAR(categorical_kl(std::vector<double>{0.75, 0.25}, std::vector<double>{0.5, 0.5}),
              0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(categorical_kl(std::vector<double>{0.75, 0.25}, std::vector<double>{0.5, 0.5}), 0.1308, 5e-5);
  EXPECT_EQ(categorical_kl(std::vector<double>{0.3, 0.7}, std::vector<double>{0.3, 0.7}), 0.0);
}

TEST(LogProbGrad, MatchesFiniteDifferences) {
  Rng rng(11);
  for (int draw = 0; draw < 64; ++draw) {
    const std::size_t rows = 3 + draw % 5, actions = 2 + draw % 4;
    const Matrix head = random_matrix(rows, actions, rng);
    const std::vector<double> f = random_vector(rows, rng);
    const std::size_t chosen = static_cast<std::size_t>(draw) % actions;
    const Matrix g = log_prob_grad(head, f, actions, chosen);
    const Matrix fd = finite_difference(
        [&](const Matrix& h) { return std::log(action_distribution(h, f, actions)[chosen]); }, head);
    EXPECT_LT(relative_error(g, fd), 1e-6);
  }
}

TEST(KlToReference, MatchesFiniteDifferences) {
  Rng rng(12);
  for (int draw = 0; draw < 64; ++draw) {
    const std::size_t rows = 2 + draw % 6, actions = 2 + draw % 3;
    const Matrix head = random_matrix(rows, actions, rng);
    const Matrix ref = random_matrix(rows, actions, rng);
    const std::vector<double> f = random_vector(rows, rng);
    const KlResult r = kl_to_reference(head, ref, f, actions);
    const Matrix fd = finite_difference(
        [&](const Matrix& h) {
          return categorical_kl(action_distribution(h, f, actions), action_distribution(ref, f, actions));
        },
        head);
    EXPECT_LT(relative_error(r.grad, fd), 1e-6);
    EXPECT_GE(r.value, 0.0);
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.1, 0.45, 0.45}), 1u);
}

TEST(Params, ZeroParamsShapesFollowFeatures) {
  const PolicyParams p = zero_params(7);
  EXPECT_EQ(p.generator.proposal_head.rows(), env::feature_length(env::RoleTag::kGeneratorProposal, 7));
  EXPECT_EQ(p.generator.proposal_head.cols(), 7u);
  EXPECT_EQ(p.generator.action_head.cols(), 2u);
  EXPECT_EQ(p.verifier.intervene_head.rows(), env::feature_length(env::RoleTag::kVerifier, 7));
  EXPECT_EQ(p.verifier.intervene_head.cols(), 2u);
  for (HeadId id : kAllHeads) EXPECT_EQ(p.head(id).squared_norm(), 0.0);
  EXPECT_EQ(role_of(HeadId::kTemplate), Role::kVerifier);
  EXPECT_EQ(role_of(HeadId::kRevision), Role::kGenerator);
}

TEST(Params, SnapshotIsIndependentCopy) {
  PolicyParams p = zero_params(4);
  const ReferenceSnapshot ref = snapshot(p);
  p.generator.action_head(0, 0) = 1.0;
  EXPECT_EQ(ref->generator.action_head(0, 0), 0.0);
}

PolicyParams random_params(std::size_t slots, std::uint64_t seed) {
  Rng rng(seed);
  PolicyParams p = zero_params(slots);
  for (HeadId id : kAllHeads) {
    for (double& v : p.head(id).data()) v = 2.0 * rng.uniform() - 1.0;
  }
  return p;
}

TEST(Checkpoint, BinaryRoundTripIsExact) {
  const PolicyParams p = random_params(5, 3);
  std::size_t slots = 0;
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(p, 5), &slots), p);
  EXPECT_EQ(slots, 5u);
}

TEST(Checkpoint, TextDumpRoundTripsValues) {
  const PolicyParams p = random_params(3, 4);
  const std::string text = checkpoint_text(p);
  const auto first_nl = text.find('\n');
  const std::string first = text.substr(0, first_nl);
  char name[32];
  unsigned r = 0, c = 0;
  double v = 0.0;
  ASSERT_EQ(std::sscanf(first.c_str(), "%31s %u %u %lf", name, &r, &c, &v), 4);
  EXPECT_EQ(v, p.head(kAllHeads[0])(r, c));
}

TEST(Checkpoint, RejectsCorruption) {
  const std::string good = encode_checkpoint(random_params(4, 5), 4);
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), Error);
  EXPECT_THROW(decode_checkpoint(good.substr(0, good.size() - 3)), Error);
  EXPECT_THROW(decode_checkpoint(good + "x"), Error);
  std::string bad_version = good;
  bad_version[8] = 9;
  EXPECT_THROW(decode_checkpoint(bad_version), Error);
}

TEST(Checkpoint, RejectsNonFinite) {
  PolicyParams p = random_params(4, 6);
  p.generator.action_head(0, 0) = std::nan("");
  EXPECT_THROW(decode_checkpoint(encode_checkpoint(p, 4)), Error);
}

}  // namespace
}  // namespace dpa::policy
