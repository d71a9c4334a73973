#include "env/corpus_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "common/errors.hpp"
#include "common/io.hpp"
#include "common/rng.hpp"

namespace dpa::env {
namespace {

using Json = nlohmann::ordered_json;

std::string operand_name(const TaskInstance& task, const OperandRef& ref) {
  if (ref.source == OperandRef::Source::kInput) return task.inputs.at(ref.index).name;
  return fmt::format("L{}", ref.index);
}

OperandRef parse_operand(const TaskInstance& task, const std::string& name) {
  if (name.size() > 1 && name[0] == 'L' && std::all_of(name.begin() + 1, name.end(), ::isdigit)) {
    return {OperandRef::Source::kLine, static_cast<std::size_t>(std::stoull(name.substr(1)))};
  }
  for (std::size_t i = 0; i < task.inputs.size(); ++i) {
    if (task.inputs[i].name == name) return {OperandRef::Source::kInput, i};
  }
  fail(ErrorCode::kInvalidArgument, fmt::format("task {}: unknown operand '{}'", task.id, name));
}

}  // namespace

std::string task_to_json_line(const TaskInstance& task) {
  Json j;
  j["id"] = task.id;
  j["seed"] = task.seed;
  Json inputs = Json::object();
  for (const InputField& f : task.inputs) inputs[f.name] = f.value;
  j["inputs"] = std::move(inputs);
  Json lines = Json::array();
  for (const LineRule& rule : task.lines) {
    Json l;
    l["kind"] = std::string(to_string(rule.kind));
    Json ops = Json::array();
    for (const OperandRef& ref : rule.operands) ops.push_back(operand_name(task, ref));
    l["operands"] = std::move(ops);
    if (rule.kind == RuleKind::kBracketLookup) {
      l["thresholds"] = rule.thresholds;
      l["rates_bp"] = rule.rates_bp;
    }
    lines.push_back(std::move(l));
  }
  j["lines"] = std::move(lines);
  j["evaluated_units"] = task.evaluated_units;
  return j.dump();
}

TaskInstance task_from_json_line(std::string_view line) {
  TaskInstance task;
  try {
    const Json j = Json::parse(line);
    task.id = j.at("id").get<std::string>();
    task.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, value] : j.at("inputs").items()) task.inputs.push_back({name, value.get<Cents>()});
    for (const Json& l : j.at("lines")) {
      LineRule rule;
      rule.kind = rule_kind_from_string(l.at("kind").get<std::string>());
      for (const Json& op : l.at("operands")) rule.operands.push_back(parse_operand(task, op.get<std::string>()));
      if (l.contains("thresholds")) rule.thresholds = l.at("thresholds").get<std::vector<Cents>>();
      if (l.contains("rates_bp")) rule.rates_bp = l.at("rates_bp").get<std::vector<std::int64_t>>();
      task.lines.push_back(std::move(rule));
    }
    task.evaluated_units = j.at("evaluated_units").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, fmt::format("malformed task record: {}", e.what()));
  }
  validate(task);
  return task;
}

std::string corpus_to_jsonl(std::span<const TaskInstance> tasks) {
  std::string out;
  for (const TaskInstance& t : tasks) {
    out += task_to_json_line(t);
    out += '\n';
  }
  return out;
}

std::vector<TaskInstance> corpus_from_jsonl(std::string_view text) {
  std::vector<TaskInstance> tasks;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) tasks.push_back(task_from_json_line(line));
    start = end + 1;
  }
  return tasks;
}

std::vector<TaskInstance> read_corpus(const std::filesystem::path& path) {
  return corpus_from_jsonl(read_file(path));
}

std::vector<TaskInstance> generate_corpus(std::uint64_t seed, std::size_t num_tasks,
                                          const DifficultyConfig& difficulty) {
  std::vector<TaskInstance> tasks;
  tasks.reserve(num_tasks);
  for (std::size_t i = 0; i < num_tasks; ++i) {
    tasks.push_back(generate_task(mix_seed({seed, static_cast<std::uint64_t>(i)}), difficulty));
  }
  return tasks;
}

CorpusSplit split_corpus(std::vector<TaskInstance> tasks, double train_fraction,
                         std::uint64_t split_seed) {
  require(train_fraction >= 0.0 && train_fraction <= 1.0, "train fraction outside [0, 1]");
  const std::size_t n = tasks.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed({split_seed, hash_string("split")}));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) in_train[perm[k]] = true;
  CorpusSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? split.train : split.test).push_back(std::move(tasks[i]));
  }
  return split;
}

}  // namespace dpa::env
