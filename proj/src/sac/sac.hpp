#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "env/task_env.hpp"

namespace dpa::sac {

using env::Cents;
using env::OperandRef;

enum class Assertion : std::uint8_t { kIncorrect, kNeedsReview };

// One drawable template per rule kind, plus the fallback used when the drawn
// template does not apply to the unit.
enum class TemplateId : std::uint8_t {
  kSum,
  kDiff,
  kClampNonneg,
  kBracketLookup,
  kCopy,
  kGeneric,
};
inline constexpr std::size_t kNumDrawableTemplates = 5;

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);
TemplateId template_for(env::RuleKind kind);

struct Claim {
  std::size_t target_unit = 0;
  Assertion assertion = Assertion::kIncorrect;
  friend bool operator==(const Claim&, const Claim&) = default;
};

struct Argument {
  TemplateId rule_template = TemplateId::kGeneric;
  std::vector<OperandRef> text_slots;
  friend bool operator==(const Argument&, const Argument&) = default;
};

struct EvidenceItem {
  OperandRef ref;
  Cents value = 0;
  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

// SAC_t = (claim, argument, evidence), optionally with a suggested correction.
struct SafetyAssuranceCase {
  Claim claim;
  Argument argument;
  std::vector<EvidenceItem> evidence;
  std::optional<Cents> suggested_correction;
  friend bool operator==(const SafetyAssuranceCase&, const SafetyAssuranceCase&) = default;
};

struct SacScore {
  bool claim_targets_correct_line = false;
  bool argument_cites_applicable_rule = false;
  bool evidence_in_context = false;

  // Mean of the three criteria.
  double value() const noexcept {
    return (static_cast<double>(claim_targets_correct_line) +
            static_cast<double>(argument_cites_applicable_rule) +
            static_cast<double>(evidence_in_context)) /
           3.0;
  }
};

// Fills template `template_draw` (index into the drawable templates) with the
// unit's operands as they appear in the context. A template that does not
// match the unit's rule kind falls back to the generic claim.
SafetyAssuranceCase emit_sac(const env::DecisionContext& context, Cents proposal,
                             std::size_t template_draw);

SacScore score_sac(const SafetyAssuranceCase& sac, const env::DecisionContext& context,
                   Cents proposal);

// c_sac = 1 - S_x
constexpr int sac_correct_label(int s_x) noexcept { return 1 - s_x; }

}  // namespace dpa::sac
