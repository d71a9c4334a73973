#include <gtest/gtest.h>

#include "experiment/report.hpp"

namespace dpa::experiment {
namespace {

using game::CaseLabel;

train::EvalRecord record(std::size_t step, std::size_t c1, std::size_t total) {
  train::EvalRecord r;
  r.step = step;
  r.test.counts[static_cast<std::size_t>(CaseLabel::kC1)] = c1;
  r.test.counts[static_cast<std::size_t>(CaseLabel::kC4)] = total - c1;
  r.test.total = total;
  r.test.submitted_correct = c1;
  return r;
}

TEST(Wilson, HalfOfTwenty) {
  const auto [lo, hi] = wilson_interval(10, 20);
  EXPECT_NEAR(lo, 0.299, 1e-3);
  EXPECT_NEAR(hi, 0.701, 1e-3);
  EXPECT_NEAR(lo + hi, 1.0, 1e-12);
}

TEST(Wilson, Boundaries) {
  EXPECT_EQ(wilson_interval(0, 30).first, 0.0);
  EXPECT_EQ(wilson_interval(30, 30).second, 1.0);
  EXPECT_EQ(wilson_interval(0, 0), (std::pair<double, double>{0.0, 1.0}));
}

TEST(Windows, SingleEvaluationHasZeroSpread) {
  const std::vector<train::EvalRecord> w{record(0, 3, 10)};
  const WindowStat s = window_stat(w, CaseLabel::kC1);
  EXPECT_DOUBLE_EQ(s.pooled, 0.3);
  EXPECT_EQ(s.stddev, 0.0);
  EXPECT_EQ(s.evaluations, 1u);
}

TEST(Windows, PooledAndPopulationStd) {
  const std::vector<train::EvalRecord> w{record(0, 2, 10), record(1, 6, 10)};
  const WindowStat s = window_stat(w, CaseLabel::kC1);
  EXPECT_DOUBLE_EQ(s.pooled, 0.4);
  EXPECT_NEAR(s.stddev, 0.2, 1e-15);
}

TEST(Windows, InitialAndFinalSteps) {
  train::TrainingRun run;
  for (std::size_t step : train::eval_steps(20, 5, 2)) run.evals.push_back(record(step, step % 3, 10));
  const CaseWindows w = case_windows(run, 20, 2);
  ASSERT_EQ(w.initial.size(), 2u);
  ASSERT_EQ(w.final.size(), 2u);
  EXPECT_EQ(w.initial[0].step, 0u);
  EXPECT_EQ(w.initial[1].step, 1u);
  EXPECT_EQ(w.final[0].step, 19u);
  EXPECT_EQ(w.final[1].step, 20u);
}

TEST(Tables, SummaryHasOneRowPerSeed) {
  std::vector<SummaryRow> rows(2);
  rows[0].method = "dpa";
  rows[1].method = "dpa";
  rows[1].seed = 2;
  const std::string t = summary_table(rows);
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 3);
  EXPECT_EQ(t.rfind("method\tseed", 0), 0u);
}

}  // namespace
}  // namespace dpa::experiment
