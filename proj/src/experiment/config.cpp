#include "experiment/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/io.hpp"
#include "common/rng.hpp"

namespace dpa::experiment {
namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::kConfig, msg); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const KeySpec* find_spec(std::string_view key) {
  for (const KeySpec& s : config_schema()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

bool parse_uint(std::string_view s, std::uint64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1") return out = true, true;
  if (s == "false" || s == "0") return out = false, true;
  return false;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

void check_value(const KeySpec& spec, std::string_view v) {
  std::uint64_t u = 0;
  double d = 0.0;
  bool b = false;
  auto bad = [&](std::string_view expected) {
    config_error(fmt::format("{}: '{}' is not {}", spec.key, v, expected));
  };
  switch (spec.type) {
    case ValueType::kString: break;
    case ValueType::kUint:
      if (!parse_uint(v, u)) bad("a non-negative integer");
      break;
    case ValueType::kDouble:
      if (!parse_double(v, d)) bad("a finite number");
      break;
    case ValueType::kBool:
      if (!parse_bool(v, b)) bad("a boolean");
      break;
    case ValueType::kChoice: {
      const auto options = split(spec.choices, '|');
      if (std::find(options.begin(), options.end(), v) == options.end()) bad(fmt::format("one of {}", spec.choices));
      break;
    }
    case ValueType::kSeedList:
      for (std::string_view part : split(v, ',')) {
        if (!parse_uint(part, u)) bad("a comma-separated list of seeds");
      }
      break;
  }
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"run.command", ValueType::kChoice, "train-dpa",
       "gen-corpus|train-dpa|train-baseline|eval|audit-theory|track-ode", "command to run"},
      {"run.out_dir", ValueType::kString, "artifacts", "", "output root"},
      {"run.seeds", ValueType::kSeedList, "1,2,3,4,5", "", "training seeds, one run each"},
      {"run.threads", ValueType::kUint, "1", "", "rollout worker threads"},
      {"env.seed", ValueType::kUint, "11", "", "corpus generation seed"},
      {"env.split_seed", ValueType::kUint, "11", "", "train/test split seed"},
      {"env.num_tasks", ValueType::kUint, "100", "", "tasks in the generated corpus"},
      {"env.train_fraction", ValueType::kDouble, "0.8", "", "fraction of tasks in the training split"},
      {"env.min_lines", ValueType::kUint, "4", "", ""},
      {"env.max_lines", ValueType::kUint, "7", "", ""},
      {"env.min_inputs", ValueType::kUint, "3", "", ""},
      {"env.max_inputs", ValueType::kUint, "5", "", ""},
      {"env.num_distractors", ValueType::kUint, "6", "", "wrong candidates per decision unit"},
      {"env.max_evaluated_units", ValueType::kUint, "8", "", "scored lines per task (the last ones)"},
      {"env.noise", ValueType::kDouble, "0.5", "", "verifier feature noise"},
      {"env.generator_noise", ValueType::kDouble, "0.8", "", "generator feature noise"},
      {"env.noise_seed", ValueType::kUint, "0", "", "feature noise seed"},
      {"env.corpus", ValueType::kString, "", "", "JSONL corpus to load instead of generating"},
      {"train.beta_v", ValueType::kDouble, "0.04", "", "verifier KL coefficient"},
      {"train.beta_fx", ValueType::kDouble, "0.04", "", "proposal KL coefficient"},
      {"train.beta_fz", ValueType::kDouble, "0.04", "", "revision KL coefficient"},
      {"train.beta_fa", ValueType::kDouble, "0.04", "", "KEEP/REVISE KL coefficient"},
      {"train.epsilon_a", ValueType::kDouble, "1e-6", "", "advantage guard"},
      {"train.schedule", ValueType::kChoice, "constant", "constant|robbins_monro", ""},
      {"train.eta", ValueType::kDouble, "0.5", "", "constant step size"},
      {"train.rm_c", ValueType::kDouble, "0.5", "", "Robbins-Monro numerator"},
      {"train.rm_t0", ValueType::kDouble, "10", "", "Robbins-Monro offset"},
      {"train.batch_tasks", ValueType::kUint, "8", "", "tasks per training step"},
      {"train.revision_k", ValueType::kUint, "5", "", "best-of-K revision samples"},
      {"train.max_steps", ValueType::kUint, "150", "", ""},
      {"train.eval_interval", ValueType::kUint, "5", "", ""},
      {"train.window", ValueType::kUint, "5", "", "steps pooled in the case-proportion windows"},
      {"train.gradient_mode", ValueType::kChoice, "sampled", "sampled|expected", ""},
      {"train.advantage_mode", ValueType::kChoice, "normalized", "normalized|centered", ""},
      {"train.visitation_floor", ValueType::kDouble, "0.001", "", "minimum rolling SAC rate"},
      {"train.visitation_window", ValueType::kUint, "5", "", ""},
      {"train.sac_cost", ValueType::kDouble, "0", "", "cost subtracted from R_V(SAC)"},
      {"train.parse_failure_rate", ValueType::kDouble, "0", "", "malformed revision probability"},
      {"train.temperature", ValueType::kDouble, "1", "", "logit temperature"},
      {"eval.greedy", ValueType::kBool, "true", "", "argmax actions at evaluation"},
      {"eval.k", ValueType::kUint, "1", "", "revision samples in stochastic evaluation"},
      {"eval.checkpoint", ValueType::kString, "", "", "checkpoint for the eval command"},
      {"eval.corpus", ValueType::kString, "", "", "JSONL corpus for the eval command"},
      {"eval.method", ValueType::kChoice, "dpa", "dpa|baseline", "rollout protocol for the eval command"},
      {"theory.beta", ValueType::kDouble, "1.0", "", "KL coefficient of the tracking game"},
      {"theory.batch", ValueType::kUint, "64", "", ""},
      {"theory.window", ValueType::kDouble, "20", "", "interpolated-time window"},
      {"theory.max_steps", ValueType::kUint, "2000000", "", "step budget of the tracking run"},
      {"theory.rm_c", ValueType::kDouble, "0.5", "", ""},
      {"theory.rm_t0", ValueType::kDouble, "10", "", ""},
      {"theory.seed", ValueType::kUint, "1", "", ""},
      {"theory.bandit_beta", ValueType::kDouble, "0.01", "", "KL coefficient of the best-response bandits"},
      {"theory.bandit_eta", ValueType::kDouble, "0.5", "", ""},
      {"theory.bandit_seeds", ValueType::kUint, "10", "", ""},
  };
  return schema;
}

Config::Config() {
  for (const KeySpec& s : config_schema()) values_.emplace(std::string(s.key), std::string(s.default_value));
}

void Config::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  const KeySpec* spec = find_spec(key);
  if (spec == nullptr) config_error(fmt::format("unknown config key '{}'", key));
  check_value(*spec, value);
  values_.find(key)->second = std::string(value);
}

bool Config::has_key(std::string_view key) const { return find_spec(key) != nullptr; }

const std::string& Config::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) config_error(fmt::format("unknown config key '{}'", key));
  return it->second;
}

double Config::get_double(std::string_view key) const {
  double d = 0.0;
  if (!parse_double(get(key), d)) config_error(fmt::format("{} is not a number", key));
  return d;
}

std::uint64_t Config::get_uint(std::string_view key) const {
  std::uint64_t u = 0;
  if (!parse_uint(get(key), u)) config_error(fmt::format("{} is not an integer", key));
  return u;
}

bool Config::get_bool(std::string_view key) const {
  bool b = false;
  if (!parse_bool(get(key), b)) config_error(fmt::format("{} is not a boolean", key));
  return b;
}

std::vector<std::uint64_t> Config::get_seeds(std::string_view key) const {
  std::vector<std::uint64_t> seeds;
  for (std::string_view part : split(get(key), ',')) {
    std::uint64_t u = 0;
    if (!parse_uint(part, u)) config_error(fmt::format("{} is not a seed list", key));
    seeds.push_back(u);
  }
  return seeds;
}

void Config::load_text(std::string_view text) {
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(fmt::format("line {}: malformed section header", line_no));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(fmt::format("line {}: expected key = value", line_no));
    std::string key(trim(line.substr(0, eq)));
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    set(key, line.substr(eq + 1));
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  load_text(text);
}

std::string Config::to_text() const {
  std::string out;
  std::string section;
  for (const KeySpec& s : config_schema()) {
    const std::string_view sec = s.key.substr(0, s.key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = std::string(sec);
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", s.key.substr(s.key.find('.') + 1), get(s.key));
  }
  return out;
}

std::uint64_t Config::hash() const {
  Config copy = *this;
  copy.values_.find(std::string_view("run.out_dir"))->second.clear();
  return hash_string(copy.to_text());
}

ExperimentConfig resolve(const Config& c) {
  ExperimentConfig x;
  x.command = c.get("run.command");
  x.out_dir = c.get("run.out_dir");
  if (x.out_dir.empty()) config_error("run.out_dir must not be empty");
  x.seeds = c.get_seeds("run.seeds");
  x.threads = c.get_uint("run.threads");
  if (x.threads == 0) config_error("run.threads must be >= 1");

  env::DifficultyConfig& d = x.difficulty;
  d.min_lines = c.get_uint("env.min_lines");
  d.max_lines = c.get_uint("env.max_lines");
  d.min_inputs = c.get_uint("env.min_inputs");
  d.max_inputs = c.get_uint("env.max_inputs");
  d.num_distractors = c.get_uint("env.num_distractors");
  d.max_evaluated_units = c.get_uint("env.max_evaluated_units");
  d.noise = c.get_double("env.noise");
  d.generator_noise = c.get_double("env.generator_noise");
  try {
    env::validate(d);
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (d.noise < 0.0 || d.generator_noise < 0.0) config_error("noise levels must be >= 0");
  x.env_seed = c.get_uint("env.seed");
  x.split_seed = c.get_uint("env.split_seed");
  x.num_tasks = c.get_uint("env.num_tasks");
  x.train_fraction = c.get_double("env.train_fraction");
  if (!(x.train_fraction > 0.0 && x.train_fraction < 1.0)) config_error("env.train_fraction must be in (0, 1)");
  x.corpus = c.get("env.corpus");

  x.features.num_slots = d.num_distractors + 1;
  x.features.verifier_noise = d.noise;
  x.features.generator_noise = d.generator_noise;
  x.features.noise_seed = c.get_uint("env.noise_seed");
  x.features.temperature = c.get_double("train.temperature");
  if (!(x.features.temperature > 0.0)) config_error("train.temperature must be > 0");

  train::TrainConfig& t = x.train;
  t.beta_v = c.get_double("train.beta_v");
  t.beta_fx = c.get_double("train.beta_fx");
  t.beta_fz = c.get_double("train.beta_fz");
  t.beta_fa = c.get_double("train.beta_fa");
  t.epsilon_a = c.get_double("train.epsilon_a");
  t.schedule.kind = c.get("train.schedule") == "robbins_monro" ? train::StepSchedule::Kind::kRobbinsMonro
                                                               : train::StepSchedule::Kind::kConstant;
  t.schedule.eta = c.get_double("train.eta");
  t.schedule.c = c.get_double("train.rm_c");
  t.schedule.t0 = c.get_double("train.rm_t0");
  t.batch_tasks = c.get_uint("train.batch_tasks");
  t.revision_k = c.get_uint("train.revision_k");
  t.max_steps = c.get_uint("train.max_steps");
  t.eval_interval = c.get_uint("train.eval_interval");
  t.gradient_mode =
      c.get("train.gradient_mode") == "expected" ? train::GradientMode::kExpected : train::GradientMode::kSampled;
  t.advantage_mode =
      c.get("train.advantage_mode") == "centered" ? train::AdvantageMode::kCentered : train::AdvantageMode::kNormalized;
  t.visitation_floor = c.get_double("train.visitation_floor");
  t.visitation_window = c.get_uint("train.visitation_window");
  t.sac_cost = c.get_double("train.sac_cost");
  t.parse_failure_rate = c.get_double("train.parse_failure_rate");
  t.threads = x.threads;
  train::validate(t);
  x.window = c.get_uint("train.window");
  if (x.window == 0) config_error("train.window must be >= 1");

  x.eval.greedy = c.get_bool("eval.greedy");
  x.eval.k = c.get_uint("eval.k");
  if (x.eval.k == 0) config_error("eval.k must be >= 1");
  x.eval_checkpoint = c.get("eval.checkpoint");
  x.eval_corpus = c.get("eval.corpus");
  x.eval_method = c.get("eval.method") == "baseline" ? train::Method::kGeneratorOnly : train::Method::kDpaGrpo;
  x.eval.threads = x.threads;

  x.theory_beta = c.get_double("theory.beta");
  if (!(x.theory_beta > 0.0)) config_error("theory.beta must be > 0");
  x.tracking.batch = c.get_uint("theory.batch");
  x.tracking.window = c.get_double("theory.window");
  x.tracking.max_steps = c.get_uint("theory.max_steps");
  x.tracking.rm_c = c.get_double("theory.rm_c");
  x.tracking.rm_t0 = c.get_double("theory.rm_t0");
  x.tracking.seed = c.get_uint("theory.seed");
  if (x.tracking.batch == 0 || !(x.tracking.window > 0.0) || !(x.tracking.rm_c > 0.0) || !(x.tracking.rm_t0 > 0.0)) {
    config_error("theory.batch, theory.window, theory.rm_c and theory.rm_t0 must be positive");
  }
  x.bandit_beta = c.get_double("theory.bandit_beta");
  x.bandit_eta = c.get_double("theory.bandit_eta");
  x.bandit_seeds = c.get_uint("theory.bandit_seeds");
  if (!(x.bandit_beta > 0.0) || !(x.bandit_eta > 0.0) || x.bandit_seeds == 0) {
    config_error("theory.bandit_beta, theory.bandit_eta and theory.bandit_seeds must be positive");
  }

  auto must_exist = [](const std::filesystem::path& p, std::string_view key) {
    if (p.empty()) config_error(fmt::format("{} is required for this command", key));
    if (!std::filesystem::is_regular_file(p)) config_error(fmt::format("{}: no such file '{}'", key, p.string()));
  };
  if (!x.corpus.empty()) must_exist(x.corpus, "env.corpus");
  if (x.command == "eval") {
    must_exist(x.eval_checkpoint, "eval.checkpoint");
    must_exist(x.eval_corpus, "eval.corpus");
  }
  return x;
}

}  // namespace dpa::experiment
