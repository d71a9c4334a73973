#include <gtest/gtest.h>

#include "common/errors.hpp"
#include "sac/sac.hpp"
#include "test_util.hpp"

namespace dpa::sac {
namespace {

using env::RuleKind;
using testing::in;
using testing::line;

env::TaskInstance taxable_income_task() {
  env::TaskInstance t;
  t.id = "agi-minus-deduction";
  t.seed = 1;
  t.inputs = {{"agi", 16170700}, {"std_deduction", 1461000}};
  t.lines.push_back({RuleKind::kDiff, {in(0), in(1)}, {}, {}});
  t.evaluated_units = {0};
  return t;
}

TEST(Sac, MatchingTemplateCarriesEvidenceAndCorrection) {
  const env::TaskInstance t = taxable_income_task();
  const env::DecisionContext ctx(t);
  const SafetyAssuranceCase sac = emit_sac(ctx, 14600000, static_cast<std::size_t>(TemplateId::kDiff));
  EXPECT_EQ(sac.claim.target_unit, 1u);
  EXPECT_EQ(sac.claim.assertion, Assertion::kIncorrect);
  EXPECT_EQ(sac.argument.rule_template, TemplateId::kDiff);
  ASSERT_EQ(sac.evidence.size(), 2u);
  EXPECT_EQ(sac.evidence[0].value, 16170700);
  EXPECT_EQ(sac.suggested_correction, 14709700);
  const SacScore q = score_sac(sac, ctx, 14600000);
  EXPECT_DOUBLE_EQ(q.value(), 1.0);
}

TEST(Sac, MismatchedTemplateFallsBackToGeneric) {
  const env::TaskInstance t = taxable_income_task();
  const env::DecisionContext ctx(t);
  const SafetyAssuranceCase sac = emit_sac(ctx, 14600000, static_cast<std::size_t>(TemplateId::kSum));
  EXPECT_EQ(sac.argument.rule_template, TemplateId::kGeneric);
  EXPECT_EQ(sac.claim.assertion, Assertion::kNeedsReview);
  EXPECT_FALSE(sac.suggested_correction.has_value());
  const SacScore q = score_sac(sac, ctx, 14600000);
  EXPECT_TRUE(q.claim_targets_correct_line);
  EXPECT_FALSE(q.argument_cites_applicable_rule);
  EXPECT_FALSE(q.evidence_in_context);
  EXPECT_NEAR(q.value(), 1.0 / 3.0, 1e-15);
}

TEST(Sac, EvidenceMustMatchContext) {
  const env::TaskInstance t = taxable_income_task();
  const env::DecisionContext ctx(t);
  SafetyAssuranceCase sac = emit_sac(ctx, 0, static_cast<std::size_t>(TemplateId::kDiff));
  sac.evidence[1].value += 1;
  EXPECT_FALSE(score_sac(sac, ctx, 0).evidence_in_context);
}

TEST(Sac, SuggestionUsesSubmittedPrefix) {
  env::TaskInstance t;
  t.id = "chain";
  t.seed = 2;
  t.inputs = {{"a", 100}};
  t.lines.push_back({RuleKind::kCopy, {in(0)}, {}, {}});
  t.lines.push_back({RuleKind::kCopy, {line(0)}, {}, {}});
  t.evaluated_units = {0, 1};
  env::DecisionContext ctx = advance(env::DecisionContext(t), 90);
  const SafetyAssuranceCase sac = emit_sac(ctx, 0, static_cast<std::size_t>(TemplateId::kCopy));
  EXPECT_EQ(sac.suggested_correction, 90);
}

TEST(Sac, TemplateNamesRoundTrip) {
  for (std::size_t k = 0; k <= kNumDrawableTemplates; ++k) {
    const auto id = static_cast<TemplateId>(k);
    EXPECT_EQ(template_from_string(to_string(id)), id);
  }
  EXPECT_THROW(template_from_string("NOPE"), Error);
  EXPECT_THROW(emit_sac(env::DecisionContext(taxable_income_task()), 0, kNumDrawableTemplates), Error);
}

TEST(Sac, LabelIsComplementOfProposalCorrectness) {
  EXPECT_EQ(sac_correct_label(1), 0);
  EXPECT_EQ(sac_correct_label(0), 1);
}

}  // namespace
}  // namespace dpa::sac
