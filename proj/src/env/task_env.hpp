#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dpa::env {

// All monetary quantities are integer cents so that scoring is exact.
using Cents = std::int64_t;

enum class RuleKind : std::uint8_t {
  kSum,
  kDiff,
  kClampNonneg,
  kBracketLookup,
  kCopy,
};
inline constexpr std::size_t kNumRuleKinds = 5;

std::string_view to_string(RuleKind kind);
RuleKind rule_kind_from_string(std::string_view name);

struct OperandRef {
  enum class Source : std::uint8_t { kInput, kLine };
  Source source = Source::kInput;
  std::size_t index = 0;

  friend bool operator==(const OperandRef&, const OperandRef&) = default;
};

struct LineRule {
  RuleKind kind = RuleKind::kSum;
  std::vector<OperandRef> operands;
  // BRACKET_LOOKUP only: bracket lower edges (strictly increasing) and the
  // marginal rate of each bracket in basis points.
  std::vector<Cents> thresholds;
  std::vector<std::int64_t> rates_bp;

  friend bool operator==(const LineRule&, const LineRule&) = default;
};

struct InputField {
  std::string name;
  Cents value = 0;

  friend bool operator==(const InputField&, const InputField&) = default;
};

struct TaskInstance {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<InputField> inputs;
  std::vector<LineRule> lines;
  // Line indices scored as decision units, in order; unit t (1-based) is
  // evaluated_units[t - 1].
  std::vector<std::size_t> evaluated_units;

  std::size_t horizon() const noexcept { return evaluated_units.size(); }

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct DifficultyConfig {
  std::size_t min_lines = 4;
  std::size_t max_lines = 7;
  std::size_t min_inputs = 3;
  std::size_t max_inputs = 5;
  std::size_t num_distractors = 6;
  // Verifier feature noise (the learnability knob) and generator feature noise.
  double noise = 0.5;
  double generator_noise = 0.8;
  // The last min(lines, max_evaluated_units) lines are scored.
  std::size_t max_evaluated_units = 8;
};

void validate(const DifficultyConfig& difficulty);

// Checks the structural invariants of a task (acyclic references, valid
// operands, increasing thresholds, horizon >= 1). Throws on violation.
void validate(const TaskInstance& task);

TaskInstance generate_task(std::uint64_t seed, const DifficultyConfig& difficulty);

// Piecewise-linear marginal-rate schedule: each bracket's rate applies to the
// part of `amount` inside that bracket. Rounded half away from zero to cents.
Cents bracket_amount(Cents amount, const std::vector<Cents>& thresholds,
                     const std::vector<std::int64_t>& rates_bp);

// Applies one rule to already-resolved operand values.
Cents evaluate_rule(const LineRule& rule, const std::vector<Cents>& operand_values);

// Ground-truth value of every line by topological (index-order) evaluation.
std::vector<Cents> oracle_line_values(const TaskInstance& task);

// Ground-truth value of decision unit `unit_index` (1-based). Never reads
// submitted outputs.
Cents oracle_value(const TaskInstance& task, std::size_t unit_index);

// Strict-match correctness bit (S_x or S_z depending on what is passed).
int score_correct(Cents proposed, const TaskInstance& task, std::size_t unit_index);

std::size_t line_of_unit(const TaskInstance& task, std::size_t unit_index);

// m_t = (task, u_t, o_<t). The task must outlive every context built on it.
class DecisionContext {
 public:
  explicit DecisionContext(const TaskInstance& task);

  const TaskInstance& task() const noexcept { return *task_; }
  std::size_t unit_index() const noexcept { return unit_index_; }
  const std::vector<Cents>& submitted_prefix() const noexcept { return prefix_; }
  bool terminal() const noexcept { return unit_index_ > task_->horizon(); }
  std::size_t line_index() const;

  // Value of an operand as visible in this context: inputs as given, earlier
  // decision units as submitted, non-evaluated lines by recomputation.
  Cents visible_value(const OperandRef& ref) const;

  friend DecisionContext advance(const DecisionContext& context, Cents submitted);

 private:
  const TaskInstance* task_;
  std::size_t unit_index_ = 1;
  std::vector<Cents> prefix_;
};

DecisionContext advance(const DecisionContext& context, Cents submitted);

// Candidate values for one decision unit: the oracle value exactly once plus
// structured distractors, in a deterministic shuffled order.
struct CandidateSet {
  std::vector<Cents> values;

  std::size_t size() const noexcept { return values.size(); }
  // Slot index of `value`, or size() when absent.
  std::size_t slot_of(Cents value) const noexcept;
};

CandidateSet candidate_set(const TaskInstance& task, std::size_t unit_index,
                           std::size_t num_distractors);

}  // namespace dpa::env
