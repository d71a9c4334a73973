#include "env/task_env.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::env {
namespace {

constexpr std::int64_t kBasisPoints = 10000;

// Integer division rounding half away from zero.
std::int64_t div_round(std::int64_t num, std::int64_t den) {
  const std::int64_t q = num / den;
  const std::int64_t r = num % den;
  if (2 * std::llabs(r) >= den) return q + (num >= 0 ? 1 : -1);
  return q;
}

Cents resolve_ground(const OperandRef& ref, const TaskInstance& task,
                     const std::vector<Cents>& line_values) {
  if (ref.source == OperandRef::Source::kInput) return task.inputs.at(ref.index).value;
  return line_values.at(ref.index);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::kSum: return "SUM";
    case RuleKind::kDiff: return "DIFF";
    case RuleKind::kClampNonneg: return "CLAMP_NONNEG";
    case RuleKind::kBracketLookup: return "BRACKET_LOOKUP";
    case RuleKind::kCopy: return "COPY";
  }
  return "?";
}

RuleKind rule_kind_from_string(std::string_view name) {
  for (std::size_t k = 0; k < kNumRuleKinds; ++k) {
    const auto kind = static_cast<RuleKind>(k);
    if (to_string(kind) == name) return kind;
  }
  fail(ErrorCode::kInvalidArgument, fmt::format("unknown rule kind '{}'", name));
}

void validate(const DifficultyConfig& d) {
  if (d.min_lines == 0 || d.max_lines == 0) fail(ErrorCode::kInvalidArgument, "difficulty has zero lines");
  if (d.max_evaluated_units == 0) fail(ErrorCode::kInvalidArgument, "difficulty has zero evaluated units");
  require(d.min_lines <= d.max_lines, "difficulty: min_lines > max_lines");
  require(d.min_inputs >= 1 && d.min_inputs <= d.max_inputs, "difficulty: bad input count range");
  require(d.num_distractors >= 1, "difficulty: need at least one distractor");
  require(d.noise >= 0.0 && d.generator_noise >= 0.0, "difficulty: negative noise level");
}

void validate(const TaskInstance& task) {
  require(!task.lines.empty(), "task has no lines");
  require(task.horizon() >= 1, "task has no evaluated units");
  for (std::size_t i = 0; i < task.lines.size(); ++i) {
    const LineRule& rule = task.lines[i];
    require(!rule.operands.empty(), fmt::format("line {} has no operands", i));
    for (const OperandRef& ref : rule.operands) {
      if (ref.source == OperandRef::Source::kInput) {
        require(ref.index < task.inputs.size(), fmt::format("line {} references missing input", i));
      } else {
        require(ref.index < i, fmt::format("line {} references a non-earlier line", i));
      }
    }
    switch (rule.kind) {
      case RuleKind::kDiff:
        require(rule.operands.size() == 2, "DIFF needs two operands");
        break;
      case RuleKind::kClampNonneg:
      case RuleKind::kCopy:
      case RuleKind::kBracketLookup:
        require(rule.operands.size() == 1, "unary rule needs one operand");
        break;
      case RuleKind::kSum:
        break;
    }
    if (rule.kind == RuleKind::kBracketLookup) {
      require(!rule.thresholds.empty() && rule.thresholds.size() == rule.rates_bp.size(),
              "bracket thresholds/rates mismatch");
      for (std::size_t k = 1; k < rule.thresholds.size(); ++k) {
        require(rule.thresholds[k] > rule.thresholds[k - 1], "bracket thresholds not strictly increasing");
      }
    }
  }
  for (std::size_t k = 0; k < task.evaluated_units.size(); ++k) {
    require(task.evaluated_units[k] < task.lines.size(), "evaluated unit out of range");
    if (k > 0) require(task.evaluated_units[k] > task.evaluated_units[k - 1], "evaluated units not increasing");
  }
}

Cents bracket_amount(Cents amount, const std::vector<Cents>& thresholds,
                     const std::vector<std::int64_t>& rates_bp) {
  std::int64_t numerator = 0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const Cents lo = thresholds[k];
    if (amount <= lo) break;
    const Cents hi = k + 1 < thresholds.size() ? std::min(amount, thresholds[k + 1]) : amount;
    numerator += (hi - lo) * rates_bp[k];
  }
  return div_round(numerator, kBasisPoints);
}

Cents evaluate_rule(const LineRule& rule, const std::vector<Cents>& v) {
  switch (rule.kind) {
    case RuleKind::kSum: {
      Cents total = 0;
      for (Cents x : v) total += x;
      return total;
    }
    case RuleKind::kDiff: return v.at(0) - v.at(1);
    case RuleKind::kClampNonneg: return std::max<Cents>(0, v.at(0));
    case RuleKind::kBracketLookup: return bracket_amount(v.at(0), rule.thresholds, rule.rates_bp);
    case RuleKind::kCopy: return v.at(0);
  }
  return 0;
}

std::vector<Cents> oracle_line_values(const TaskInstance& task) {
  std::vector<Cents> values;
  values.reserve(task.lines.size());
  std::vector<Cents> operands;
  for (const LineRule& rule : task.lines) {
    operands.clear();
    for (const OperandRef& ref : rule.operands) operands.push_back(resolve_ground(ref, task, values));
    values.push_back(evaluate_rule(rule, operands));
  }
  return values;
}

std::size_t line_of_unit(const TaskInstance& task, std::size_t unit_index) {
  if (unit_index < 1 || unit_index > task.horizon()) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("unit index {} outside [1, {}] for task {}", unit_index, task.horizon(), task.id));
  }
  return task.evaluated_units[unit_index - 1];
}

Cents oracle_value(const TaskInstance& task, std::size_t unit_index) {
  const std::size_t line = line_of_unit(task, unit_index);
  return oracle_line_values(task)[line];
}

int score_correct(Cents proposed, const TaskInstance& task, std::size_t unit_index) {
  return proposed == oracle_value(task, unit_index) ? 1 : 0;
}

TaskInstance generate_task(std::uint64_t seed, const DifficultyConfig& d) {
  validate(d);
  Rng rng(mix_seed({seed, hash_string("task")}));
  TaskInstance task;
  task.seed = seed;
  task.id = fmt::format("task-{:016x}", seed);

  const auto n_inputs = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(d.min_inputs), static_cast<std::int64_t>(d.max_inputs)));
  const auto n_lines = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(d.min_lines), static_cast<std::int64_t>(d.max_lines)));

  for (std::size_t i = 0; i < n_inputs; ++i) {
    const Cents dollars = rng.uniform_int(50, 80000);
    const Cents cents = rng.uniform_int(0, 99);
    task.inputs.push_back({fmt::format("in{:02d}", i), dollars * 100 + cents});
  }

  auto random_input = [&] {
    return OperandRef{OperandRef::Source::kInput,
                      static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n_inputs) - 1))};
  };
  auto random_line = [&](std::size_t below) {
    return OperandRef{OperandRef::Source::kLine,
                      static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(below) - 1))};
  };

  std::vector<Cents> values;
  for (std::size_t i = 0; i < n_lines; ++i) {
    LineRule rule;
    if (i == 0) {
      // The first line is always a SUM over two inputs.
      rule.kind = RuleKind::kSum;
      const OperandRef a = random_input();
      OperandRef b = random_input();
      if (n_inputs > 1) {
        while (b == a) b = random_input();
      }
      rule.operands = {a, b};
    } else {
      // Weighted kind draw: SUM 3, DIFF 2, CLAMP 2, BRACKET 2, COPY 1.
      static constexpr std::array<RuleKind, 10> kKindTable = {
          RuleKind::kSum,         RuleKind::kSum,         RuleKind::kSum,
          RuleKind::kDiff,        RuleKind::kDiff,        RuleKind::kClampNonneg,
          RuleKind::kClampNonneg, RuleKind::kBracketLookup, RuleKind::kBracketLookup,
          RuleKind::kCopy};
      rule.kind = kKindTable[static_cast<std::size_t>(rng.uniform_int(0, 9))];
      switch (rule.kind) {
        case RuleKind::kSum: {
          const auto n_ops = static_cast<std::size_t>(rng.uniform_int(2, 3));
          rule.operands.push_back(random_line(i));
          for (std::size_t k = 1; k < n_ops; ++k) {
            rule.operands.push_back(rng.bernoulli(0.5) ? random_input() : random_line(i));
          }
          break;
        }
        case RuleKind::kDiff:
          rule.operands = {random_line(i), random_input()};
          break;
        case RuleKind::kClampNonneg: {
          // Clamp the most recent DIFF when there is one.
          OperandRef target = random_line(i);
          for (std::size_t k = i; k-- > 0;) {
            if (task.lines[k].kind == RuleKind::kDiff) {
              target = {OperandRef::Source::kLine, k};
              break;
            }
          }
          rule.operands = {target};
          break;
        }
        case RuleKind::kBracketLookup: {
          const OperandRef base = random_line(i);
          rule.operands = {base};
          const Cents scale = std::max<Cents>(std::llabs(values[base.index]), 1000000);
          const auto n_brackets = static_cast<std::size_t>(rng.uniform_int(2, 3));
          Cents edge = 0;
          std::int64_t rate = rng.uniform_int(500, 1500);
          for (std::size_t k = 0; k < n_brackets; ++k) {
            rule.thresholds.push_back(edge);
            rule.rates_bp.push_back(rate);
            edge += scale * rng.uniform_int(20, 60) / 100;
            rate += rng.uniform_int(500, 1500);
          }
          break;
        }
        case RuleKind::kCopy:
          rule.operands = {rng.bernoulli(0.7) ? random_line(i) : random_input()};
          break;
      }
    }
    std::vector<Cents> operands;
    for (const OperandRef& ref : rule.operands) operands.push_back(resolve_ground(ref, task, values));
    values.push_back(evaluate_rule(rule, operands));
    task.lines.push_back(std::move(rule));
  }

  const std::size_t n_eval = std::min(n_lines, d.max_evaluated_units);
  for (std::size_t i = n_lines - n_eval; i < n_lines; ++i) task.evaluated_units.push_back(i);
  validate(task);
  return task;
}

DecisionContext::DecisionContext(const TaskInstance& task) : task_(&task) {}

std::size_t DecisionContext::line_index() const { return line_of_unit(*task_, unit_index_); }

Cents DecisionContext::visible_value(const OperandRef& ref) const {
  if (ref.source == OperandRef::Source::kInput) return task_->inputs.at(ref.index).value;
  const auto& units = task_->evaluated_units;
  const auto it = std::find(units.begin(), units.end(), ref.index);
  if (it != units.end()) {
    const auto unit_pos = static_cast<std::size_t>(it - units.begin());
    if (unit_pos < prefix_.size()) return prefix_[unit_pos];
  }
  return oracle_line_values(*task_).at(ref.index);
}

DecisionContext advance(const DecisionContext& context, Cents submitted) {
  if (context.terminal()) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("cannot advance past the horizon of task {}", context.task().id));
  }
  DecisionContext next = context;
  next.prefix_.push_back(submitted);
  next.unit_index_ += 1;
  return next;
}

std::size_t CandidateSet::slot_of(Cents value) const noexcept {
  const auto it = std::find(values.begin(), values.end(), value);
  return static_cast<std::size_t>(it - values.begin());
}

CandidateSet candidate_set(const TaskInstance& task, std::size_t unit_index,
                           std::size_t num_distractors) {
  const std::size_t line = line_of_unit(task, unit_index);
  const std::vector<Cents> ground = oracle_line_values(task);
  const LineRule& rule = task.lines[line];
  const Cents truth = ground[line];
  std::vector<Cents> ops;
  for (const OperandRef& ref : rule.operands) ops.push_back(resolve_ground(ref, task, ground));

  Rng rng(mix_seed({task.seed, static_cast<std::uint64_t>(unit_index), hash_string("candidates")}));

  auto omit_component = [&]() -> Cents {
    switch (rule.kind) {
      case RuleKind::kSum:
        return truth - ops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ops.size()) - 1))];
      case RuleKind::kDiff: return ops[0];
      case RuleKind::kClampNonneg: return ops[0] < 0 ? ops[0] : ops[0] / 2;
      case RuleKind::kBracketLookup: {
        // Drop the highest bracket reached.
        std::vector<Cents> th = rule.thresholds;
        std::vector<std::int64_t> rates = rule.rates_bp;
        while (th.size() > 1 && ops[0] <= th.back()) {
          th.pop_back();
          rates.pop_back();
        }
        if (th.size() > 1) {
          rates.back() = 0;
        } else {
          rates[0] /= 2;
        }
        return bracket_amount(ops[0], th, rates);
      }
      case RuleKind::kCopy: return 0;
    }
    return truth;
  };
  auto sign_flip = [&]() -> Cents { return -truth; };
  auto off_by_one = [&]() -> Cents {
    if (rule.kind == RuleKind::kBracketLookup) {
      // Marginal rates shifted one bracket up.
      std::vector<std::int64_t> rates = rule.rates_bp;
      for (std::size_t k = 0; k + 1 < rates.size(); ++k) rates[k] = rule.rates_bp[k + 1];
      rates.back() += rule.rates_bp.back() - rule.rates_bp.front();
      return bracket_amount(ops[0], rule.thresholds, rates);
    }
    return truth + (rng.bernoulli(0.5) ? 100 : -100);
  };
  auto copy_wrong_line = [&]() -> Cents {
    std::vector<Cents> pool;
    for (std::size_t k = 0; k < ground.size(); ++k) {
      if (k != line) pool.push_back(ground[k]);
    }
    for (const InputField& f : task.inputs) pool.push_back(f.value);
    return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
  };

  std::vector<int> order = {0, 1, 2, 3};
  shuffle(order, rng);
  std::vector<Cents> values = {truth};
  auto add = [&](Cents v) {
    if (values.size() <= num_distractors && std::find(values.begin(), values.end(), v) == values.end()) {
      values.push_back(v);
    }
  };
  for (int pattern : order) {
    switch (pattern) {
      case 0: add(omit_component()); break;
      case 1: add(sign_flip()); break;
      case 2: add(off_by_one()); break;
      case 3: add(copy_wrong_line()); break;
    }
  }
  for (Cents k = 1; values.size() <= num_distractors; ++k) {
    add(truth + 100 * k);
    add(truth - 100 * k);
  }
  shuffle(values, rng);
  return CandidateSet{std::move(values)};
}

}  // namespace dpa::env
