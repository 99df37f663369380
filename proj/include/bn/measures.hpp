#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bn/grid.hpp"
#include "bn/integrator.hpp"

namespace bn {

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

/// Positive measure on [0, inf): point masses plus an optional gridded density f dx.
struct RadonMeasure {
  std::vector<Atom> atoms;
  std::optional<Distribution> density;

  void validate() const;
  /// mu([0, inf))
  double total_mass() const;
};

struct GBetaParams {
  double beta = 1.2;
  double kappa = 1.0;
};

/**
 * sup over R > 0 of mu((R, R+1)) weighted by e^{beta x}. Windows are open:
 * an atom sitting on a window edge is not counted. R -> 0+ is admitted.
 * Any beta > 0 is evaluated; the class itself needs beta > 1.
 */
double gbeta_norm_measure(const RadonMeasure& mu, double beta);

bool in_gbeta_class(const RadonMeasure& mu, const GBetaParams& params);

struct MassBound {
  double total_mass = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// total mass against 3 ||mu||_{G^beta}
MassBound mass_bound_check(const RadonMeasure& mu, double beta);

/**
 * Largest T with f0_norm + C (T + 1/(m sqrt(beta))) kappa^2 (1 + kappa) <= kappa,
 * clamped at 0.
 */
double existence_horizon(double f0_norm, double mass, double beta, double kappa, double calib_C);

/**
 * f_i = scale x_i^{-alpha} e^{-decay x_i} on a copy of `grid` whose first
 * cell integrates x^{-alpha} exactly.
 */
Distribution singular_init(double alpha, double scale, double decay, const GridPtr& grid);

struct CalibrationCase {
  Distribution initial;
  double kappa = 0.0;
};

struct CalibrationOutcome {
  double f0_norm = 0.0;
  double mass = 0.0;
  double kappa = 0.0;
  /// last recorded time with gbeta_norm <= kappa (t_limit if never exceeded)
  double exit_time = 0.0;
  bool exited = false;
  /// C that makes existence_horizon reproduce exit_time; 0 when the norm never exceeded kappa
  double implied_C = 0.0;
};

struct Calibration {
  double calib_C = 0.0;
  std::vector<CalibrationOutcome> cases;
};

/**
 * Runs each case with the integrator until its G^beta norm first exceeds
 * kappa (or t_limit) and backs out the constant of the self-mapping bound.
 * The largest implied constant is returned, which makes the horizon formula
 * conservative on every calibration case.
 */
Calibration calibrate_horizon(const std::vector<CalibrationCase>& cases, double beta, double t_limit,
                              const StepControls& controls, Scheme scheme);

void write_measure(std::ostream& os, const RadonMeasure& mu, const std::string& density_path = {});
/// Reads `atom <x> <mass>` lines; a `density <path>` line names a snapshot file, resolved against base_dir.
RadonMeasure read_measure(std::istream& is, const std::string& base_dir = ".");

}  // namespace bn
