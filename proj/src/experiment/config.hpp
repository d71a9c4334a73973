#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "env/features.hpp"
#include "env/task_env.hpp"
#include "theory/tracking.hpp"
#include "train/train_loop.hpp"
#include "train/trainer.hpp"

namespace dpa::experiment {

enum class ValueType : std::uint8_t { kString, kUint, kDouble, kBool, kChoice, kSeedList };

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
  std::string_view choices;  // '|'-separated, kChoice only
  std::string_view doc;
};

const std::vector<KeySpec>& config_schema();

// Flat `section.key = value` store. Text form: optional `[section]` headers,
// `key = value` lines, `#` comments. Unknown keys and ill-typed values are
// rejected with ErrorCode::kConfig.
class Config {
 public:
  Config();

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;
  bool has_key(std::string_view key) const;

  double get_double(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::uint64_t> get_seeds(std::string_view key) const;

  void load_text(std::string_view text);
  void load_file(const std::filesystem::path& path);

  // Every key, grouped by section in schema order.
  std::string to_text() const;
  // FNV-1a over to_text() without run.out_dir.
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

inline constexpr std::string_view kCommands[] = {"gen-corpus", "train-dpa",    "train-baseline",
                                                 "eval",       "audit-theory", "track-ode"};

struct ExperimentConfig {
  std::string command;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;

  env::DifficultyConfig difficulty;
  std::uint64_t env_seed = 11;
  std::uint64_t split_seed = 11;
  std::size_t num_tasks = 100;
  double train_fraction = 0.8;
  std::filesystem::path corpus;
  env::FeatureConfig features;

  train::TrainConfig train;
  std::size_t window = 5;
  train::EvalConfig eval;
  std::filesystem::path eval_checkpoint;
  std::filesystem::path eval_corpus;
  train::Method eval_method = train::Method::kDpaGrpo;

  double theory_beta = 1.0;
  theory::TrackingConfig tracking;
  double bandit_beta = 0.01;
  double bandit_eta = 0.5;
  std::size_t bandit_seeds = 10;
};

// Typed view with cross-key validation (paths must exist for the command).
ExperimentConfig resolve(const Config& config);

}  // namespace dpa::experiment
