#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "env/task_env.hpp"
#include "experiment/config.hpp"
#include "train/train_loop.hpp"

namespace dpa::experiment {

struct CorpusData {
  std::vector<env::TaskInstance> train;
  std::vector<env::TaskInstance> test;
};

// env.corpus when set, otherwise a generated corpus; split at the task level
// with env.split_seed.
CorpusData prepare_corpus(const ExperimentConfig& config);

train::TrainingRun train_seed(const ExperimentConfig& config, const CorpusData& corpus, train::Method method,
                              std::uint64_t seed);

// Runs run.command and writes its artifacts under run.out_dir, including
// manifest.cfg, which reproduces the run when passed back as the config.
void run(const Config& config);

}  // namespace dpa::experiment
