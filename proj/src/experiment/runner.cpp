#include "experiment/runner.hpp"

#include <fmt/format.h>

#include "common/errors.hpp"
#include "common/io.hpp"
#include "env/corpus_io.hpp"
#include "experiment/report.hpp"
#include "game/transition_io.hpp"
#include "policy/checkpoint.hpp"
#include "theory/audits.hpp"
#include "theory/experiments.hpp"
#include "theory/tracking.hpp"

namespace dpa::experiment {
namespace {

namespace fs = std::filesystem;

void write_manifest(const Config& config, const fs::path& out) {
  write_file_atomic(out / "manifest.cfg",
                    fmt::format("# config hash {:016x}\n{}", config.hash(), config.to_text()));
}

void write_corpus_files(const CorpusData& corpus, const fs::path& out) {
  write_file_atomic(out / "train.jsonl", env::corpus_to_jsonl(corpus.train));
  write_file_atomic(out / "test.jsonl", env::corpus_to_jsonl(corpus.test));
  std::string split = "task_id\tsplit\n";
  for (const env::TaskInstance& t : corpus.train) split += fmt::format("{}\ttrain\n", t.id);
  for (const env::TaskInstance& t : corpus.test) split += fmt::format("{}\ttest\n", t.id);
  write_file_atomic(out / "split.tsv", split);
}

void run_gen_corpus(const ExperimentConfig& x) {
  const CorpusData corpus = prepare_corpus(x);
  std::vector<env::TaskInstance> all = corpus.train;
  all.insert(all.end(), corpus.test.begin(), corpus.test.end());
  write_file_atomic(x.out_dir / "corpus.jsonl", env::corpus_to_jsonl(all));
  write_corpus_files(corpus, x.out_dir);
}

void run_training(const ExperimentConfig& x, train::Method method) {
  const CorpusData corpus = prepare_corpus(x);
  write_corpus_files(corpus, x.out_dir);
  std::vector<SummaryRow> rows(x.seeds.size());
  for (std::size_t i = 0; i < x.seeds.size(); ++i) {
    const std::uint64_t seed = x.seeds[i];
    const train::TrainingRun run = train_seed(x, corpus, method, seed);
    const fs::path dir = x.out_dir / fmt::format("seed-{}", seed);
    const CaseWindows windows = case_windows(run, x.train.max_steps, x.window);
    write_file_atomic(dir / "metrics.tsv", metrics_table(run));
    write_file_atomic(dir / "eval.tsv", eval_table(run));
    write_file_atomic(dir / "case_window.tsv", case_window_table(windows));
    write_file_atomic(dir / "accuracy_curve.tsv", accuracy_curve_table(run));
    write_file_atomic(dir / "case_window.svg", case_window_svg(windows));
    write_file_atomic(dir / "accuracy_curve.svg", accuracy_curve_svg(run));
    train::EvalConfig ec = x.eval;
    ec.seed = seed;
    const std::vector<game::Transition> final_eval =
        train::evaluate(run.final_params, corpus.test, ec, x.features, method);
    write_file_atomic(dir / "transitions_test.jsonl", game::transitions_to_jsonl(final_eval));
    write_file_atomic(dir / "histogram_test.tsv", game::histogram_record(game::aggregate(final_eval)));
    policy::save_checkpoint(dir / "checkpoint.bin", run.final_params, x.features.num_slots);
    write_file_atomic(dir / "checkpoint.txt", policy::checkpoint_text(run.final_params));
    rows[i] = summary_row(run, seed);
  }
  write_file_atomic(x.out_dir / "summary.tsv", summary_table(rows));
}

void run_eval(const ExperimentConfig& x) {
  std::size_t slots = 0;
  const policy::PolicyParams params = policy::load_checkpoint(x.eval_checkpoint, &slots);
  if (slots != x.features.num_slots) {
    fail(ErrorCode::kConfig, fmt::format("checkpoint has {} candidate slots, config implies {}", slots,
                                         x.features.num_slots));
  }
  const std::vector<env::TaskInstance> tasks = env::read_corpus(x.eval_corpus);
  if (tasks.empty()) fail(ErrorCode::kConfig, fmt::format("eval.corpus '{}' has no tasks", x.eval_corpus.string()));
  train::EvalConfig ec = x.eval;
  ec.seed = x.seeds.front();
  const std::vector<game::Transition> transitions = train::evaluate(params, tasks, ec, x.features, x.eval_method);
  const game::CaseHistogram h = game::aggregate(transitions);
  const auto [lo, hi] = wilson_interval(h.submitted_correct, h.total);
  std::string summary = game::histogram_record(h);
  summary += fmt::format("wilson_lo\t{:.6f}\nwilson_hi\t{:.6f}\n", lo, hi);
  write_file_atomic(x.out_dir / "eval_summary.tsv", summary);
  write_file_atomic(x.out_dir / "transitions.jsonl", game::transitions_to_jsonl(transitions));
}

std::string report_rows(std::string_view prefix, const theory::BestResponseReport& r) {
  std::string out;
  for (const theory::ContextAudit& row : r.rows) {
    out += fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{}\n", prefix, row.label, row.optimal_action,
                       row.argmax_action, row.suboptimal_mass, row.s_x, row.s_bar_z, row.excluded ? 1 : 0);
  }
  return out;
}

void run_audit_theory(const ExperimentConfig& x) {
  using theory::BanditProtocol;
  std::string kv;
  auto put = [&](std::string_view key, double v) { kv += fmt::format("{}\t{:.6g}\n", key, v); };
  auto put_step = [&](std::string_view key, const std::optional<std::size_t>& s) {
    kv += fmt::format("{}\t{}\n", key, s ? fmt::to_string(*s) : std::string("none"));
  };

  BanditProtocol exact;
  exact.beta = x.bandit_beta;
  exact.mode = train::GradientMode::kExpected;
  exact.max_steps = 2000;
  exact.schedule.eta = x.bandit_eta;
  exact.seeds = x.bandit_seeds;
  exact.base_seed = x.tracking.seed;
  BanditProtocol sampled = exact;
  sampled.mode = train::GradientMode::kSampled;
  sampled.max_steps = 5000;

  const auto l1e = theory::verifier_bandit_convergence(1, exact);
  const auto l1s = theory::verifier_bandit_convergence(1, sampled);
  put_step("verifier_bandit_expected_first_step", l1e.first_step);
  put("verifier_bandit_expected_final_p_opt", l1e.final_mean);
  put_step("verifier_bandit_sampled_first_step", l1s.first_step);
  put("verifier_bandit_sampled_final_mean_p_opt", l1s.final_mean);
  put("verifier_bandit_sampled_final_min_p_opt", l1s.final_min);

  for (const auto& [name, s_x, s_bar_z] :
       {std::tuple{"keep", 1, 0.3}, std::tuple{"revise", 0, 0.9}}) {
    const auto e = theory::generator_bandit_convergence(s_x, s_bar_z, exact);
    const auto s = theory::generator_bandit_convergence(s_x, s_bar_z, sampled);
    put(fmt::format("keep_revise_bandit_{}_expected_dominated_mass", name), 1.0 - e.final_mean);
    put(fmt::format("keep_revise_bandit_{}_sampled_dominated_mass", name), 1.0 - s.final_mean);
  }

  for (double beta : {0.04, 0.5}) {
    const BanditProtocol p = theory::kl_target_protocol(beta, x.bandit_seeds, x.tracking.seed);
    put(fmt::format("kl_target_verifier_beta{}_max_tv", beta),
        theory::kl_structure_check(theory::kl_target_verifier_bandit(), p).max_tv);
    put(fmt::format("kl_target_generator_beta{}_max_tv", beta),
        theory::kl_structure_check(theory::kl_target_generator_bandit(), p).max_tv);
  }

  // Tabular two-context game: flow the exact field to near stationarity.
  const theory::TabularGame game = theory::two_context_game(x.theory_beta);
  const theory::GamePoint end =
      theory::ode_trajectory(game, game.zero_point(), 200.0, 0.05, theory::Integrator::kRk4, 1u << 30).back().point;
  const theory::Residual res = theory::stationarity_residual(game, end);
  put("tabular_ode_residual_phi", res.phi);
  put("tabular_ode_residual_theta", res.theta);
  const auto va = theory::verifier_best_response_audit(game, end);
  const auto ga = theory::generator_dominance_audit(game, end);
  put("tabular_verifier_match_rate", va.match_rate);
  put("tabular_verifier_suboptimal_mass", va.mean_suboptimal_mass);
  put("tabular_generator_match_rate", ga.match_rate);
  put("tabular_generator_dominated_mass", ga.mean_suboptimal_mass);

  std::string detail = "audit\tcontext\toptimal\targmax\tsuboptimal_mass\ts_x\ts_bar_z\texcluded\n";
  detail += report_rows("tabular_verifier", va);
  detail += report_rows("tabular_generator", ga);

  if (!x.eval_checkpoint.empty()) {
    std::size_t slots = 0;
    const policy::PolicyParams params = policy::load_checkpoint(x.eval_checkpoint, &slots);
    if (slots != x.features.num_slots) fail(ErrorCode::kConfig, "checkpoint slot count does not match the config");
    const std::vector<env::TaskInstance> tasks =
        x.eval_corpus.empty() ? prepare_corpus(x).test : env::read_corpus(x.eval_corpus);
    train::EvalConfig ec = x.eval;
    ec.seed = x.seeds.front();
    const std::vector<game::Transition> contexts = train::evaluate(params, tasks, ec, x.features, x.eval_method);
    const auto ev = theory::verifier_best_response_audit(params, contexts, x.features);
    game::RolloutConfig rc = train::training_rollout(x.train, x.features, train::Method::kDpaGrpo);
    const auto eg = theory::generator_dominance_audit(params, contexts, rc, 64, x.seeds.front());
    put("env_verifier_match_rate", ev.match_rate);
    put("env_verifier_suboptimal_mass", ev.mean_suboptimal_mass);
    put("env_generator_audited", static_cast<double>(eg.audited));
    put("env_generator_match_rate", eg.match_rate);
    put("env_generator_dominated_mass", eg.mean_suboptimal_mass);
    detail += report_rows("env_verifier", ev);
    detail += report_rows("env_generator", eg);
  }
  write_file_atomic(x.out_dir / "audit.tsv", kv);
  write_file_atomic(x.out_dir / "audit_contexts.tsv", detail);
}

void run_track_ode(const ExperimentConfig& x) {
  const theory::TabularGame game = theory::two_context_game(x.theory_beta);
  const theory::TrackingReport report = theory::tracking_comparison(game, x.tracking);
  write_file_atomic(x.out_dir / "tracking.tsv", tracking_table(report));
  write_file_atomic(x.out_dir / "tracking_summary.tsv", tracking_summary(report));
  write_file_atomic(x.out_dir / "tracking.svg", tracking_svg(report));
}

}  // namespace

CorpusData prepare_corpus(const ExperimentConfig& x) {
  std::vector<env::TaskInstance> tasks =
      x.corpus.empty() ? env::generate_corpus(x.env_seed, x.num_tasks, x.difficulty) : env::read_corpus(x.corpus);
  if (tasks.size() < 2) fail(ErrorCode::kConfig, "the corpus needs at least two tasks to split");
  env::CorpusSplit split = env::split_corpus(std::move(tasks), x.train_fraction, x.split_seed);
  if (split.train.empty() || split.test.empty()) fail(ErrorCode::kConfig, "the train/test split leaves a side empty");
  return {std::move(split.train), std::move(split.test)};
}

train::TrainingRun train_seed(const ExperimentConfig& x, const CorpusData& corpus, train::Method method,
                              std::uint64_t seed) {
  train::TrainConfig tc = x.train;
  tc.seed = seed;
  train::EvalConfig ec = x.eval;
  ec.seed = seed;
  return train::train_loop(tc, ec, x.features, corpus.train, corpus.test, method, x.window);
}

void run(const Config& config) {
  const ExperimentConfig x = resolve(config);
  fs::create_directories(x.out_dir);
  if (x.command == "gen-corpus") {
    run_gen_corpus(x);
  } else if (x.command == "train-dpa") {
    run_training(x, train::Method::kDpaGrpo);
  } else if (x.command == "train-baseline") {
    run_training(x, train::Method::kGeneratorOnly);
  } else if (x.command == "eval") {
    run_eval(x);
  } else if (x.command == "audit-theory") {
    run_audit_theory(x);
  } else if (x.command == "track-ode") {
    run_track_ode(x);
  } else {
    fail(ErrorCode::kConfig, fmt::format("unknown command '{}'", x.command));
  }
  write_manifest(config, x.out_dir);
}

}  // namespace dpa::experiment
