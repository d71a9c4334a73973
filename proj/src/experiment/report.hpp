#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "game/game.hpp"
#include "theory/tracking.hpp"
#include "train/train_loop.hpp"

namespace dpa::experiment {

inline constexpr double kWilsonZ95 = 1.959963984540054;

// Wilson score interval for `successes` out of `n`; (0, 1) when n == 0.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z = kWilsonZ95);

// Pooled proportion of one case over a window of evaluations, with the
// population standard deviation of the per-evaluation proportions.
struct WindowStat {
  double pooled = 0.0;
  double stddev = 0.0;
  std::size_t evaluations = 0;
};
WindowStat window_stat(std::span<const train::EvalRecord> window, game::CaseLabel label);

struct CaseWindows {
  std::vector<train::EvalRecord> initial;
  std::vector<train::EvalRecord> final;
};
// The first and last `window` steps' evaluations.
CaseWindows case_windows(const train::TrainingRun& run, std::size_t max_steps, std::size_t window);

std::string metrics_table(const train::TrainingRun& run);
std::string eval_table(const train::TrainingRun& run);
std::string case_window_table(const CaseWindows& w);
std::string accuracy_curve_table(const train::TrainingRun& run);

struct SummaryRow {
  std::string method;
  std::uint64_t seed = 0;
  double c1_c3 = 0.0;
  double c4 = 0.0;
  double c6a = 0.0;
  std::array<double, 3> train_abc{};
  double test_accuracy = 0.0;
  std::size_t test_correct = 0;
  std::size_t test_total = 0;
  double untrained_accuracy = 0.0;
};
SummaryRow summary_row(const train::TrainingRun& run, std::uint64_t seed);
std::string summary_table(std::span<const SummaryRow> rows);

// Vector plots; every plotted number is also in the matching table.
std::string case_window_svg(const CaseWindows& w);
std::string accuracy_curve_svg(const train::TrainingRun& run);
std::string tracking_svg(const theory::TrackingReport& report);

std::string tracking_table(const theory::TrackingReport& report);
std::string tracking_summary(const theory::TrackingReport& report);

}  // namespace dpa::experiment
