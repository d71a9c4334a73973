#include "game/transition_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace dpa::game {
namespace {

using Json = nlohmann::ordered_json;

std::string ref_name(const env::OperandRef& ref) {
  return fmt::format("{}{}", ref.source == env::OperandRef::Source::kInput ? "in" : "L", ref.index);
}

Json sac_json(const sac::SafetyAssuranceCase& s) {
  Json j;
  j["claim"] = {{"target_unit", s.claim.target_unit},
                {"assertion", s.claim.assertion == sac::Assertion::kIncorrect ? "INCORRECT" : "NEEDS_REVIEW"}};
  Json slots = Json::array();
  for (const env::OperandRef& r : s.argument.text_slots) slots.push_back(ref_name(r));
  j["argument"] = {{"template", std::string(sac::to_string(s.argument.rule_template))}, {"slots", std::move(slots)}};
  Json ev = Json::array();
  for (const sac::EvidenceItem& e : s.evidence) ev.push_back({{"ref", ref_name(e.ref)}, {"value", e.value}});
  j["evidence"] = std::move(ev);
  j["suggested_correction"] = s.suggested_correction ? Json(*s.suggested_correction) : Json(nullptr);
  return j;
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string transition_to_json_line(const Transition& tr) {
  const env::TaskInstance& task = tr.context.task();
  Json j;
  j["task_id"] = task.id;
  j["unit"] = tr.context.unit_index();
  j["line"] = tr.context.line_index();
  j["kind"] = std::string(env::to_string(task.lines[tr.context.line_index()].kind));
  j["candidates"] = tr.candidates;
  j["proposal_slot"] = tr.proposal_slot;
  j["proposal"] = tr.proposal;
  j["verifier_action"] = std::string(to_string(tr.verifier_action));
  j["sac"] = tr.sac ? sac_json(*tr.sac) : Json(nullptr);
  if (tr.sac_score) {
    j["sac_score"] = {{"claim", tr.sac_score->claim_targets_correct_line},
                      {"argument", tr.sac_score->argument_cites_applicable_rule},
                      {"evidence", tr.sac_score->evidence_in_context},
                      {"value", tr.sac_score->value()}};
  } else {
    j["sac_score"] = nullptr;
  }
  j["revision"] = opt(tr.revision);
  Json cands = Json::array();
  for (const RevisionCandidate& c : tr.revision_candidates) {
    cands.push_back({{"slot", c.slot}, {"value", c.value}, {"valid", c.valid}, {"correct", c.correct}, {"prob", c.prob}});
  }
  j["revision_candidates"] = std::move(cands);
  j["revision_fallback"] = tr.revision_fallback;
  j["generator_action"] = std::string(to_string(tr.generator_action));
  j["submitted"] = tr.submitted;
  j["s_x"] = tr.s_x;
  j["s_z"] = opt(tr.s_z);
  j["c_sac"] = tr.c_sac;
  j["case"] = std::string(to_string(classify_case(tr)));
  j["logp"] = {{"proposal", tr.logp.proposal},
               {"verifier", tr.logp.verifier},
               {"template", opt(tr.logp.template_draw)},
               {"revision", opt(tr.logp.revision)},
               {"action", opt(tr.logp.action)}};
  return j.dump();
}

std::string transitions_to_jsonl(std::span<const Transition> batch) {
  std::string out;
  for (const Transition& tr : batch) {
    out += transition_to_json_line(tr);
    out += '\n';
  }
  return out;
}

std::string histogram_record(const CaseHistogram& h) {
  std::string out;
  out += fmt::format("total\t{}\n", h.total);
  out += fmt::format("accuracy\t{:.6f}\n", h.accuracy());
  out += fmt::format("composed_accuracy\t{:.6f}\n", h.composed_accuracy());
  for (CaseLabel c : kAllCases) out += fmt::format("count_{}\t{}\n", to_string(c), h.count(c));
  for (CaseLabel c : kAllCases) out += fmt::format("rate_{}\t{:.6f}\n", to_string(c), h.rate(c));
  out += fmt::format("c2_revision_correct\t{}\n", h.c2_revision_correct);
  return out;
}

}  // namespace dpa::game
