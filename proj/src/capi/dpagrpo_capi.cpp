#include "dpagrpo/dpagrpo.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "common/io.hpp"
#include "env/corpus_io.hpp"
#include "experiment/config.hpp"
#include "experiment/report.hpp"
#include "experiment/runner.hpp"
#include "game/game.hpp"
#include "theory/tabular_game.hpp"
#include "train/trainer.hpp"

struct dpa_config {
  dpa::experiment::Config config;
};

struct dpa_corpus {
  std::vector<dpa::env::TaskInstance> tasks;
};

namespace {

thread_local std::string g_last_error;

dpa_status status_of(dpa::ErrorCode code) {
  switch (code) {
    case dpa::ErrorCode::kInvalidArgument: return DPA_ERR_INVALID_ARGUMENT;
    case dpa::ErrorCode::kConfig: return DPA_ERR_CONFIG;
    case dpa::ErrorCode::kNumeric: return DPA_ERR_NUMERIC;
    case dpa::ErrorCode::kIo: return DPA_ERR_IO;
  }
  return DPA_ERR_INTERNAL;
}

template <typename Fn>
dpa_status guarded(Fn fn) {
  g_last_error.clear();
  try {
    fn();
    return DPA_OK;
  } catch (const dpa::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DPA_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (p == nullptr) dpa::fail(dpa::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

void copy_out(const std::string& s, char* buffer, std::size_t size, std::size_t* required) {
  if (required != nullptr) *required = s.size() + 1;
  if (buffer == nullptr) return;
  if (size < s.size() + 1) dpa::fail(dpa::ErrorCode::kInvalidArgument, "output buffer too small");
  std::memcpy(buffer, s.c_str(), s.size() + 1);
}

const dpa::env::TaskInstance& task_at(const dpa_corpus* corpus, std::size_t task) {
  need(corpus, "corpus");
  if (task >= corpus->tasks.size()) dpa::fail(dpa::ErrorCode::kInvalidArgument, "task index out of range");
  return corpus->tasks[task];
}

}  // namespace

extern "C" {

const char* dpa_version(void) { return "0.1.0"; }

const char* dpa_last_error(void) { return g_last_error.c_str(); }

const char* dpa_status_name(dpa_status status) {
  switch (status) {
    case DPA_OK: return "ok";
    case DPA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DPA_ERR_CONFIG: return "config error";
    case DPA_ERR_NUMERIC: return "numeric failure";
    case DPA_ERR_IO: return "i/o error";
    case DPA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

dpa_status dpa_config_create(dpa_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new dpa_config{};
  });
}

void dpa_config_destroy(dpa_config* config) { delete config; }

dpa_status dpa_config_load_file(dpa_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->config.load_file(path);
  });
}

dpa_status dpa_config_load_text(dpa_config* config, const char* text) {
  return guarded([&] {
    need(config, "config");
    need(text, "text");
    config->config.load_text(text);
  });
}

dpa_status dpa_config_set(dpa_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->config.set(key, value);
  });
}

dpa_status dpa_config_get(const dpa_config* config, const char* key, char* buffer, size_t size, size_t* required) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    copy_out(config->config.get(key), buffer, size, required);
  });
}

dpa_status dpa_config_to_text(const dpa_config* config, char* buffer, size_t size, size_t* required) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->config.to_text(), buffer, size, required);
  });
}

int dpa_config_has_key(const char* key) {
  if (key == nullptr) return 0;
  const dpa::experiment::Config defaults;
  return defaults.has_key(key) ? 1 : 0;
}

dpa_status dpa_run(const dpa_config* config) {
  return guarded([&] {
    need(config, "config");
    dpa::experiment::run(config->config);
  });
}

dpa_status dpa_corpus_generate(const dpa_config* config, uint64_t seed, size_t num_tasks, dpa_corpus** out) {
  return guarded([&] {
    need(out, "out");
    dpa::env::DifficultyConfig difficulty;
    if (config != nullptr) difficulty = dpa::experiment::resolve(config->config).difficulty;
    auto corpus = std::make_unique<dpa_corpus>();
    corpus->tasks = dpa::env::generate_corpus(seed, num_tasks, difficulty);
    *out = corpus.release();
  });
}

dpa_status dpa_corpus_load(const char* path, dpa_corpus** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto corpus = std::make_unique<dpa_corpus>();
    corpus->tasks = dpa::env::read_corpus(path);
    *out = corpus.release();
  });
}

dpa_status dpa_corpus_save(const dpa_corpus* corpus, const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    dpa::write_file_atomic(path, dpa::env::corpus_to_jsonl(corpus->tasks));
  });
}

void dpa_corpus_destroy(dpa_corpus* corpus) { delete corpus; }

size_t dpa_corpus_size(const dpa_corpus* corpus) { return corpus == nullptr ? 0 : corpus->tasks.size(); }

dpa_status dpa_corpus_horizon(const dpa_corpus* corpus, size_t task, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = task_at(corpus, task).horizon();
  });
}

dpa_status dpa_corpus_oracle_value(const dpa_corpus* corpus, size_t task, size_t unit, int64_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = dpa::env::oracle_value(task_at(corpus, task), unit);
  });
}

dpa_status dpa_group_advantage(const double* rewards, size_t n, double epsilon, int centered, double* out) {
  return guarded([&] {
    need(rewards, "rewards");
    need(out, "out");
    const std::vector<double> a = dpa::train::group_advantage(
        std::span<const double>(rewards, n), epsilon,
        centered ? dpa::train::AdvantageMode::kCentered : dpa::train::AdvantageMode::kNormalized);
    std::copy(a.begin(), a.end(), out);
  });
}

dpa_status dpa_classify_case(int s_x, int verifier_action, int generator_action, int s_z, dpa_case* out) {
  return guarded([&] {
    need(out, "out");
    if (verifier_action != DPA_NS && verifier_action != DPA_SAC) {
      dpa::fail(dpa::ErrorCode::kInvalidArgument, "verifier_action must be DPA_NS or DPA_SAC");
    }
    if (generator_action != DPA_KEEP && generator_action != DPA_REVISE) {
      dpa::fail(dpa::ErrorCode::kInvalidArgument, "generator_action must be DPA_KEEP or DPA_REVISE");
    }
    if (s_x != 0 && s_x != 1) dpa::fail(dpa::ErrorCode::kInvalidArgument, "s_x must be 0 or 1");
    if (s_z > 1) dpa::fail(dpa::ErrorCode::kInvalidArgument, "s_z must be 0, 1 or -1 (absent)");
    if (s_x == 0 && verifier_action == DPA_SAC && s_z < 0) {
      dpa::fail(dpa::ErrorCode::kInvalidArgument, "s_z is required when s_x = 0 and the verifier intervened");
    }
    std::optional<int> z;
    if (s_z >= 0) z = s_z;
    const dpa::game::CaseLabel label =
        dpa::game::classify_case(s_x, static_cast<dpa::game::VerifierAction>(verifier_action),
                                 static_cast<dpa::game::GeneratorAction>(generator_action), z);
    *out = static_cast<dpa_case>(static_cast<int>(label));
  });
}

dpa_status dpa_wilson_interval(uint64_t successes, uint64_t n, double* lo, double* hi) {
  return guarded([&] {
    need(lo, "lo");
    need(hi, "hi");
    if (successes > n) dpa::fail(dpa::ErrorCode::kInvalidArgument, "successes exceeds n");
    const auto [l, h] = dpa::experiment::wilson_interval(successes, n);
    *lo = l;
    *hi = h;
  });
}

dpa_status dpa_kl_best_response(const double* ref, const double* rewards, size_t n, double beta, double* out) {
  return guarded([&] {
    need(ref, "ref");
    need(rewards, "rewards");
    need(out, "out");
    const std::vector<double> p = dpa::theory::kl_best_response_target(std::span<const double>(ref, n),
                                                                       std::span<const double>(rewards, n), beta);
    std::copy(p.begin(), p.end(), out);
  });
}

}  // extern "C"
