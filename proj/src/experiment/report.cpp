#include "experiment/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "common/errors.hpp"

namespace dpa::experiment {
namespace {

using game::CaseLabel;

constexpr CaseLabel kPlotted[] = {CaseLabel::kC1, CaseLabel::kC4, CaseLabel::kC6A};

std::string case_columns_header() {
  std::string out;
  for (CaseLabel c : game::kAllCases) out += fmt::format("\trate_{}", game::to_string(c));
  return out;
}

std::string case_columns(const game::CaseHistogram& h) {
  std::string out;
  for (CaseLabel c : game::kAllCases) out += fmt::format("\t{:.6f}", h.rate(c));
  return out;
}

struct Frame {
  double width = 640, height = 400;
  double left = 60, right = 20, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double x(double v) const { return left + (v - x0) / (x1 - x0) * (width - left - right); }
  double y(double v) const { return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string svg_open(const Frame& f, std::string_view title) {
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      f.width, f.height);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", f.width, f.height);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", f.width / 2, title);
  return out;
}

std::string svg_axes(const Frame& f, std::string_view xlabel, std::string_view ylabel, int yticks = 5) {
  std::string out;
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", f.x(f.x0),
                     f.y(f.y0), f.x(f.x1), f.y(f.y0));
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", f.x(f.x0),
                     f.y(f.y0), f.x(f.x0), f.y(f.y1));
  for (int i = 0; i <= yticks; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / yticks;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.2g}</text>\n", f.x(f.x0) - 6,
                       f.y(v) + 4, v);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", (f.x(f.x0) + f.x(f.x1)) / 2,
                     f.height - 12, xlabel);
  out += fmt::format("<text x=\"14\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2f})\">{}</text>\n",
                     (f.y(f.y0) + f.y(f.y1)) / 2, (f.y(f.y0) + f.y(f.y1)) / 2, ylabel);
  return out;
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, std::string_view color) {
  std::string out = fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
  for (const auto& [x, y] : pts) out += fmt::format("{:.2f},{:.2f} ", f.x(x), f.y(y));
  out += "\"/>\n";
  return out;
}

}  // namespace

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  require(successes <= n, "more successes than trials");
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

WindowStat window_stat(std::span<const train::EvalRecord> window, CaseLabel label) {
  WindowStat s;
  s.evaluations = window.size();
  if (window.empty()) return s;
  std::size_t count = 0, total = 0;
  double mean = 0.0;
  for (const train::EvalRecord& r : window) {
    count += r.test.count(label);
    total += r.test.total;
    mean += r.test.rate(label);
  }
  s.pooled = total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
  mean /= static_cast<double>(window.size());
  double var = 0.0;
  for (const train::EvalRecord& r : window) var += std::pow(r.test.rate(label) - mean, 2);
  s.stddev = std::sqrt(var / static_cast<double>(window.size()));
  return s;
}

CaseWindows case_windows(const train::TrainingRun& run, std::size_t max_steps, std::size_t window) {
  CaseWindows w;
  for (const train::EvalRecord& r : run.evals) {
    if (r.step < window) w.initial.push_back(r);
    if (r.step + window > max_steps) w.final.push_back(r);
  }
  return w;
}

std::string metrics_table(const train::TrainingRun& run) {
  std::string out =
      "step\teta\tsamples\ttransitions\tsac_rate\tbatch_accuracy\tloss_v\tloss_g\tkl_v\tkl_g\t"
      "groups_v\tgroups_a\tgroups_x\tgroups_z";
  for (policy::HeadId id : policy::kAllHeads) out += fmt::format("\tgrad_{}", policy::to_string(id));
  out += case_columns_header();
  out += '\n';
  for (const train::StepRecord& s : run.steps) {
    out += fmt::format("{}\t{:.6g}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{}\t{}\t{}\t{}", s.step, s.eta,
                       s.samples_seen, s.transitions, s.sac_rate, s.batch_accuracy, s.verifier_loss, s.generator_loss,
                       s.verifier_kl, s.generator_kl, s.verifier_groups, s.action_groups, s.proposal_groups,
                       s.revision_groups);
    for (double g : s.grad_norm) out += fmt::format("\t{:.6g}", g);
    out += case_columns(s.histogram);
    out += '\n';
  }
  return out;
}

std::string eval_table(const train::TrainingRun& run) {
  std::string out = "step\tsamples\ttotal\tcorrect\taccuracy\twilson_lo\twilson_hi";
  out += case_columns_header();
  out += "\ttrain_a\ttrain_b\ttrain_c\n";
  for (const train::EvalRecord& r : run.evals) {
    const auto [lo, hi] = wilson_interval(r.test.submitted_correct, r.test.total);
    out += fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}", r.step, r.samples_seen, r.test.total,
                       r.test.submitted_correct, r.test.accuracy(), lo, hi);
    out += case_columns(r.test);
    out += fmt::format("\t{:.6f}\t{:.6f}\t{:.6f}\n", r.train_abc[0], r.train_abc[1], r.train_abc[2]);
  }
  return out;
}

std::string case_window_table(const CaseWindows& w) {
  std::string out = "case\twindow\tevaluations\tpooled\tstddev\n";
  for (CaseLabel c : game::kAllCases) {
    const WindowStat a = window_stat(w.initial, c);
    const WindowStat b = window_stat(w.final, c);
    out += fmt::format("{}\tinitial\t{}\t{:.6f}\t{:.6f}\n", game::to_string(c), a.evaluations, a.pooled, a.stddev);
    out += fmt::format("{}\tfinal\t{}\t{:.6f}\t{:.6f}\n", game::to_string(c), b.evaluations, b.pooled, b.stddev);
  }
  return out;
}

std::string accuracy_curve_table(const train::TrainingRun& run) {
  std::string out = "step\tsamples\taccuracy\twilson_lo\twilson_hi\n";
  for (const train::EvalRecord& r : run.evals) {
    const auto [lo, hi] = wilson_interval(r.test.submitted_correct, r.test.total);
    out += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n", r.step, r.samples_seen, r.test.accuracy(), lo, hi);
  }
  return out;
}

SummaryRow summary_row(const train::TrainingRun& run, std::uint64_t seed) {
  require(!run.evals.empty(), "run has no evaluations");
  SummaryRow row;
  row.method = std::string(train::to_string(run.method));
  row.seed = seed;
  const train::EvalRecord& last = run.evals.back();
  row.c1_c3 = last.test.rate(CaseLabel::kC1) + last.test.rate(CaseLabel::kC3);
  row.c4 = last.test.rate(CaseLabel::kC4);
  row.c6a = last.test.rate(CaseLabel::kC6A);
  row.train_abc = last.train_abc;
  row.test_accuracy = last.test.accuracy();
  row.test_correct = last.test.submitted_correct;
  row.test_total = last.test.total;
  row.untrained_accuracy = run.evals.front().test.accuracy();
  return row;
}

std::string summary_table(std::span<const SummaryRow> rows) {
  std::string out =
      "method\tseed\tc1_plus_c3\tc4\tc6a\ttrain_a\ttrain_b\ttrain_c\ttest_accuracy\ttest_correct\ttest_total\t"
      "wilson_lo\twilson_hi\tuntrained_accuracy\n";
  for (const SummaryRow& r : rows) {
    const auto [lo, hi] = wilson_interval(r.test_correct, r.test_total);
    out += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\n",
                       r.method, r.seed, r.c1_c3, r.c4, r.c6a, r.train_abc[0], r.train_abc[1], r.train_abc[2],
                       r.test_accuracy, r.test_correct, r.test_total, lo, hi, r.untrained_accuracy);
  }
  return out;
}

std::string case_window_svg(const CaseWindows& w) {
  Frame f;
  f.x0 = 0;
  f.x1 = 3;
  double ymax = 0.1;
  for (CaseLabel c : kPlotted) {
    for (const auto* win : {&w.initial, &w.final}) {
      const WindowStat s = window_stat(*win, c);
      ymax = std::max(ymax, s.pooled + s.stddev);
    }
  }
  f.y1 = std::min(1.0, std::ceil(ymax * 10.0) / 10.0);
  std::string out = svg_open(f, "Case proportions, initial vs trained window");
  out += svg_axes(f, "case", "pooled proportion");
  const char* colors[] = {"#9e9e9e", "#1f77b4"};
  for (std::size_t i = 0; i < 3; ++i) {
    const CaseLabel c = kPlotted[i];
    for (std::size_t j = 0; j < 2; ++j) {
      const WindowStat s = window_stat(j == 0 ? w.initial : w.final, c);
      const double xa = i + 0.15 + 0.35 * j, xb = xa + 0.3;
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", f.x(xa),
                         f.y(s.pooled), f.x(xb) - f.x(xa), f.y(0) - f.y(s.pooled), colors[j]);
      const double xm = f.x((xa + xb) / 2);
      out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", xm,
                         f.y(std::max(0.0, s.pooled - s.stddev)), f.y(std::min(f.y1, s.pooled + s.stddev)));
    }
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.x(i + 0.5),
                       f.y(0) + 16, game::to_string(c));
  }
  out += fmt::format("<rect x=\"{:.0f}\" y=\"40\" width=\"10\" height=\"10\" fill=\"{}\"/>"
                     "<text x=\"{:.0f}\" y=\"49\">initial</text>\n",
                     f.width - 120, colors[0], f.width - 105);
  out += fmt::format("<rect x=\"{:.0f}\" y=\"56\" width=\"10\" height=\"10\" fill=\"{}\"/>"
                     "<text x=\"{:.0f}\" y=\"65\">trained</text>\n",
                     f.width - 120, colors[1], f.width - 105);
  out += "</svg>\n";
  return out;
}

std::string accuracy_curve_svg(const train::TrainingRun& run) {
  Frame f;
  f.x1 = 1;
  for (const train::EvalRecord& r : run.evals) f.x1 = std::max(f.x1, static_cast<double>(r.samples_seen));
  std::string out = svg_open(f, "Test accuracy vs training samples (Wilson 95%)");
  out += svg_axes(f, "training samples (tasks)", "accuracy");
  std::vector<std::pair<double, double>> pts;
  for (const train::EvalRecord& r : run.evals) {
    const double x = static_cast<double>(r.samples_seen);
    const auto [lo, hi] = wilson_interval(r.test.submitted_correct, r.test.total);
    pts.emplace_back(x, r.test.accuracy());
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#bbbbbb\"/>\n",
                       f.x(x), f.y(lo), f.y(hi));
  }
  out += polyline(f, pts, "#1f77b4");
  out += "</svg>\n";
  return out;
}

std::string tracking_svg(const theory::TrackingReport& report) {
  Frame f;
  f.x1 = std::max(report.window, report.time_reached);
  double ymax = 1e-3;
  for (const theory::TrackingSample& s : report.samples) ymax = std::max(ymax, s.distance);
  f.y1 = ymax * 1.1;
  std::string out = svg_open(f, "Distance between SGD iterates and the ODE solution");
  out += svg_axes(f, "interpolated time", "parameter distance");
  std::vector<std::pair<double, double>> pts;
  for (const theory::TrackingSample& s : report.samples) pts.emplace_back(s.time, s.distance);
  out += polyline(f, pts, "#d62728");
  out += fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n",
      f.x(report.time_reached), f.y(f.y0), f.y(f.y1));
  out += "</svg>\n";
  return out;
}

std::string tracking_table(const theory::TrackingReport& report) {
  std::string out = "step\ttime\tdistance\tsgd_residual\tode_residual\n";
  for (const theory::TrackingSample& s : report.samples) {
    out += fmt::format("{}\t{:.6f}\t{:.6e}\t{:.6e}\t{:.6e}\n", s.step, s.time, s.distance, s.sgd_residual,
                       s.ode_residual);
  }
  return out;
}

std::string tracking_summary(const theory::TrackingReport& r) {
  std::string out;
  out += fmt::format("steps_run\t{}\n", r.steps_run);
  out += fmt::format("time_reached\t{:.6f}\n", r.time_reached);
  out += fmt::format("window\t{:.6f}\n", r.window);
  out += fmt::format("window_covered\t{}\n", r.window_covered ? 1 : 0);
  out += fmt::format("steps_needed\t{:.6e}\n", r.steps_needed);
  out += fmt::format("sup_distance\t{:.6e}\n", r.sup_distance);
  out += fmt::format("sgd_residual_phi\t{:.6e}\n", r.sgd_residual.phi);
  out += fmt::format("sgd_residual_theta\t{:.6e}\n", r.sgd_residual.theta);
  out += fmt::format("ode_residual_phi\t{:.6e}\n", r.ode_residual.phi);
  out += fmt::format("ode_residual_theta\t{:.6e}\n", r.ode_residual.theta);
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    out += fmt::format("probe{}_initial_residual\t{:.6e}\n", i, r.probes[i].initial_residual);
    out += fmt::format("probe{}_final_residual\t{:.6e}\n", i, r.probes[i].final_residual);
  }
  return out;
}

}  // namespace dpa::experiment
