#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "theory/tabular_game.hpp"

namespace dpa::theory {

struct TrackingConfig {
  std::size_t batch = 64;
  // eta_n = rm_c / (n + rm_t0); the ODE clock is t_n = sum_{m<n} eta_m.
  double rm_c = 0.5;
  double rm_t0 = 10.0;
  double window = 20.0;
  std::size_t max_steps = 2000000;
  std::uint64_t seed = 1;
  // Spacing in interpolated time between recorded samples.
  double record_dt = 0.05;
  std::size_t probes = 8;
  double probe_scale = 1e-2;
  double probe_horizon = 5.0;
};

struct TrackingSample {
  std::size_t step = 0;
  double time = 0.0;
  double distance = 0.0;
  double sgd_residual = 0.0;
  double ode_residual = 0.0;
};

// Residual of a small random perturbation of the final iterate, before and
// after flowing the ODE for probe_horizon.
struct ProbeResult {
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

struct TrackingReport {
  std::size_t steps_run = 0;
  double time_reached = 0.0;
  double window = 0.0;
  bool window_covered = false;
  // Steps the schedule needs to reach the window end.
  double steps_needed = 0.0;
  double sup_distance = 0.0;
  Residual sgd_residual;
  Residual ode_residual;
  GamePoint final_sgd;
  GamePoint final_ode;
  std::vector<TrackingSample> samples;
  std::vector<ProbeResult> probes;
};

// Interpolated time after `steps` Robbins-Monro steps.
double robbins_monro_time(double c, double t0, std::size_t steps);
// Smallest n with robbins_monro_time(c, t0, n) >= horizon, as a real
// (asymptotic estimate when it exceeds 2^53).
double robbins_monro_steps_to(double c, double t0, double horizon);

// Sampled-gradient iterates with Robbins-Monro steps against the exact-field
// ODE from the same start, integrated by RK4 on the same time grid. Runs
// until the window end or max_steps, whichever comes first.
TrackingReport tracking_comparison(const TabularGame& game, const TrackingConfig& config);

}  // namespace dpa::theory
