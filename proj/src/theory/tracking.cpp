#include "theory/tracking.hpp"

#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace dpa::theory {

double robbins_monro_time(double c, double t0, std::size_t steps) {
  double t = 0.0;
  for (std::size_t n = 0; n < steps; ++n) t += c / (static_cast<double>(n) + t0);
  return t;
}

double robbins_monro_steps_to(double c, double t0, double horizon) {
  // sum_{n<N} 1/(n + t0) = psi(N + t0) - psi(t0) ~ log((N + t0 - 1/2) / (t0 - 1/2))
  const double estimate = (t0 - 0.5) * std::exp(horizon / c) - t0 + 0.5;
  if (estimate > 0x1.0p53) return estimate;
  double t = 0.0;
  double n = 0.0;
  while (t < horizon) {
    t += c / (n + t0);
    n += 1.0;
  }
  return n;
}

TrackingReport tracking_comparison(const TabularGame& game, const TrackingConfig& config) {
  require(config.batch > 0, "batch must be positive");
  require(config.rm_c > 0.0 && config.rm_t0 > 0.0, "Robbins-Monro constants must be positive");
  require(config.window > 0.0, "window must be positive");
  TrackingReport r;
  r.window = config.window;
  r.steps_needed = robbins_monro_steps_to(config.rm_c, config.rm_t0, config.window);

  Rng rng(mix_seed({config.seed, hash_string("tracking")}));
  GamePoint sgd = game.zero_point();
  GamePoint ode = sgd;
  double t = 0.0;
  double next_record = 0.0;
  auto record = [&](std::size_t step) {
    TrackingSample s;
    s.step = step;
    s.time = t;
    s.distance = distance(sgd, ode);
    s.sgd_residual = stationarity_residual(game, sgd).max();
    s.ode_residual = stationarity_residual(game, ode).max();
    r.samples.push_back(s);
  };
  record(0);
  next_record += config.record_dt;

  std::size_t n = 0;
  while (t < config.window && n < config.max_steps) {
    const double eta = config.rm_c / (static_cast<double>(n) + config.rm_t0);
    const GamePoint g = sampled_field(game, sgd, config.batch, rng);
    sgd = axpy(sgd, eta, g);
    ode = ode_step(game, ode, eta, Integrator::kRk4);
    if (!sgd.theta.all_finite() || !sgd.phi.all_finite()) fail(ErrorCode::kNumeric, "non-finite SGD iterate");
    t += eta;
    ++n;
    const double d = distance(sgd, ode);
    if (d > r.sup_distance) r.sup_distance = d;
    if (t >= next_record) {
      record(n);
      while (next_record <= t) next_record += config.record_dt;
    }
  }
  if (r.samples.back().step != n) record(n);

  r.steps_run = n;
  r.time_reached = t;
  r.window_covered = t >= config.window;
  r.sgd_residual = stationarity_residual(game, sgd);
  r.ode_residual = stationarity_residual(game, ode);

  Rng probe_rng(mix_seed({config.seed, hash_string("probe")}));
  for (std::size_t k = 0; k < config.probes; ++k) {
    GamePoint p = sgd;
    for (double& v : p.theta.data()) v += config.probe_scale * (2.0 * probe_rng.uniform() - 1.0);
    for (double& v : p.phi.data()) v += config.probe_scale * (2.0 * probe_rng.uniform() - 1.0);
    ProbeResult pr;
    pr.initial_residual = stationarity_residual(game, p).max();
    const GamePoint end = ode_trajectory(game, p, config.probe_horizon, 0.01, Integrator::kRk4, 1u << 30).back().point;
    pr.final_residual = stationarity_residual(game, end).max();
    r.probes.push_back(pr);
  }
  r.final_sgd = std::move(sgd);
  r.final_ode = std::move(ode);
  return r;
}

}  // namespace dpa::theory
