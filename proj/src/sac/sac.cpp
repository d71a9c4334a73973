#include "sac/sac.hpp"

#include <fmt/format.h>

#include "common/errors.hpp"

namespace dpa::sac {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kSum: return "SUM";
    case TemplateId::kDiff: return "DIFF";
    case TemplateId::kClampNonneg: return "CLAMP_NONNEG";
    case TemplateId::kBracketLookup: return "BRACKET_LOOKUP";
    case TemplateId::kCopy: return "COPY";
    case TemplateId::kGeneric: return "GENERIC";
  }
  return "?";
}

TemplateId template_from_string(std::string_view name) {
  for (std::size_t k = 0; k <= kNumDrawableTemplates; ++k) {
    const auto id = static_cast<TemplateId>(k);
    if (to_string(id) == name) return id;
  }
  fail(ErrorCode::kInvalidArgument, fmt::format("unknown SAC template '{}'", name));
}

TemplateId template_for(env::RuleKind kind) { return static_cast<TemplateId>(kind); }

SafetyAssuranceCase emit_sac(const env::DecisionContext& context, Cents /*proposal*/,
                             std::size_t template_draw) {
  require(template_draw < kNumDrawableTemplates, "template draw out of range");
  const std::size_t line = context.line_index();
  const env::LineRule& rule = context.task().lines[line];

  SafetyAssuranceCase sac;
  sac.claim.target_unit = context.unit_index();
  const auto chosen = static_cast<TemplateId>(template_draw);
  if (chosen != template_for(rule.kind)) {
    sac.claim.assertion = Assertion::kNeedsReview;
    sac.argument.rule_template = TemplateId::kGeneric;
    return sac;
  }

  sac.claim.assertion = Assertion::kIncorrect;
  sac.argument.rule_template = chosen;
  sac.argument.text_slots = rule.operands;
  std::vector<Cents> values;
  for (const OperandRef& ref : rule.operands) {
    const Cents v = context.visible_value(ref);
    sac.evidence.push_back({ref, v});
    values.push_back(v);
  }
  sac.suggested_correction = env::evaluate_rule(rule, values);
  return sac;
}

SacScore score_sac(const SafetyAssuranceCase& sac, const env::DecisionContext& context,
                   Cents /*proposal*/) {
  SacScore score;
  const env::TaskInstance& task = context.task();
  score.claim_targets_correct_line = sac.claim.target_unit == context.unit_index();

  const std::size_t line = context.line_index();
  const env::LineRule& rule = task.lines[line];
  score.argument_cites_applicable_rule = sac.argument.rule_template == template_for(rule.kind) &&
                                         sac.argument.text_slots == rule.operands;

  bool evidence_ok = !sac.evidence.empty();
  for (const EvidenceItem& item : sac.evidence) {
    if (!evidence_ok) break;
    const bool resolves = item.ref.source == OperandRef::Source::kInput
                              ? item.ref.index < task.inputs.size()
                              : item.ref.index < line;
    evidence_ok = resolves && context.visible_value(item.ref) == item.value;
  }
  score.evidence_in_context = evidence_ok;
  return score;
}

}  // namespace dpa::sac
