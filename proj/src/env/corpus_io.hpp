#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "env/task_env.hpp"

namespace dpa::env {

// One task per line:
//   {"id": "...", "seed": 123, "inputs": {"in00": 4200, ...},
//    "lines": [{"kind": "SUM", "operands": ["in00", "L0"],
//               "thresholds": [...], "rates_bp": [...]}, ...],
//    "evaluated_units": [0, 1, ...]}
// Operands name an input field or "L<index>" for an earlier line; values are
// integer cents.
std::string task_to_json_line(const TaskInstance& task);
TaskInstance task_from_json_line(std::string_view line);

std::string corpus_to_jsonl(std::span<const TaskInstance> tasks);
std::vector<TaskInstance> corpus_from_jsonl(std::string_view text);
std::vector<TaskInstance> read_corpus(const std::filesystem::path& path);

// Task i gets seed mix(seed, i).
std::vector<TaskInstance> generate_corpus(std::uint64_t seed, std::size_t num_tasks,
                                          const DifficultyConfig& difficulty);

struct CorpusSplit {
  std::vector<TaskInstance> train;
  std::vector<TaskInstance> test;
};

// Task-level split: a seeded permutation, the first round(fraction * n) go to
// train. Relative order inside each part follows the original corpus.
CorpusSplit split_corpus(std::vector<TaskInstance> tasks, double train_fraction,
                         std::uint64_t split_seed);

}  // namespace dpa::env
