#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bn/collision.hpp"
#include "bn/diagnostics.hpp"
#include "bn/grid.hpp"
#include "bn/trajectory.hpp"

namespace bn {

struct StepControls {
  double dt_init = 1e-3;
  double dt_max = 0.05;
  /// cap on max_i a_i dt
  double cfl_loss = 0.5;
  /// cap on the predicted max_i |Q_i| dt / f_i
  double rel_change_cap = 0.1;
  /// nodes with f_i below this fraction of max f are measured against it instead
  double rel_change_floor = 1e-6;
  /// stop once sup x f reaches this multiple of its initial value
  double blowup_threshold = 1e4;
  double t_end = 1.0;

  void validate() const;
};

enum class Scheme { etd1, etd_midpoint };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/**
 * Exponential update with frozen rates:
 *   f_i <- f_i e^{-a_i dt} + J_i (1 - e^{-a_i dt}) / a_i,
 * using J_i dt when a_i dt < 1e-8. The midpoint scheme takes an etd1 half
 * step to form the rates it then freezes for the full step.
 */
Distribution step_exponential(const Distribution& dist, double dt, Scheme scheme, Quadrature quad = Quadrature::nodal);
Distribution step_exponential(const Distribution& dist, const CollisionRates& start_rates, double dt, Scheme scheme,
                              Quadrature quad = Quadrature::nodal);

/// Frozen-rate update only; no rate evaluation.
Distribution exponential_update(const Distribution& dist, const CollisionRates& rates, double dt);

struct DtChoice {
  double dt = 0.0;
  bool underflow = false;
};

DtChoice choose_dt(const Distribution& dist, const CollisionRates& rates, const StepControls& controls, double dt_prev);

/// State needed to continue a run exactly where it stopped.
struct RunState {
  double dt_prev = 0.0;
  double target_mass = 0.0;
  double target_energy = 0.0;
  double supxf_initial = 0.0;
};

struct RunOptions {
  Scheme scheme = Scheme::etd_midpoint;
  Quadrature quadrature = Quadrature::nodal;
  bool remap = true;
  DiagnosticsSettings diagnostics;
  int snapshot_stride = 1;
  /// continue from a checkpoint instead of starting fresh
  std::optional<RunState> resume;
};

struct RunResult {
  Trajectory trajectory;
  RunState state;
  long remap_refusals = 0;
};

RunResult run(const Distribution& initial, const StepControls& controls, const RunOptions& options);

struct PicardResult {
  /// f at the uniform time levels 0, h, ..., horizon
  std::vector<Distribution> path;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

/**
 * Fixed-point iteration of the mild-solution map on [0, horizon]:
 *   T[f](t) = e^{-A(t)} f_0 + \int_0^t e^{-(A(t) - A(s))} J[f](s) ds,  A(t) = \int_0^t a[f],
 * with both time integrals by the trapezoid rule on `time_levels` + 1 points.
 */
PicardResult picard_mild(const Distribution& initial, double horizon, int time_levels, int max_iters, double tol);

}  // namespace bn
