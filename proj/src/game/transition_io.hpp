#pragma once

#include <span>
#include <string>

#include "game/game.hpp"

namespace dpa::game {

// One JSON object per transition:
//   task_id, unit, line, kind, candidates, proposal_slot, proposal,
//   verifier_action ("SAC" | "NS"), sac (null or {claim, argument, evidence,
//   suggested_correction}), sac_score, revision, revision_candidates,
//   revision_fallback, generator_action ("KEEP" | "REVISE"), submitted,
//   s_x, s_z (null on NS), c_sac, case, logp.
// Feature vectors are not logged; they are recomputable from the task.
std::string transition_to_json_line(const Transition& tr);
std::string transitions_to_jsonl(std::span<const Transition> batch);

// "key\tvalue" lines: total, accuracy, composed_accuracy, count_<case>,
// rate_<case>, c2_revision_correct.
std::string histogram_record(const CaseHistogram& h);

}  // namespace dpa::game
