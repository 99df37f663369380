#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bn/grid.hpp"
#include "bn/integrator.hpp"

namespace bn {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
  double seconds = 0.0;
};

/// fast: reduced sizes, for a quick sanity pass. full: the acceptance parameters.
enum class Level { fast, full };

std::string to_string(Level level);
Level level_from_string(const std::string& s);

/// Geometric grid on [0, x_max] whose first node sits at x1.
GridPtr geometric_grid(int nodes, double x_max, double x1);

/// A x^{-p} e^{-x} with A chosen so that the mass is `ratio` times the critical mass at its energy.
Distribution supercritical_data(const GridPtr& grid, double ratio, double power = 0.0);

/// Loss and gain rates against the brute-force oracle on random data.
CheckResult check_oracle(Level level);
/// Drift of mass and energy under grid refinement, and per step with remap.
CheckResult check_conservation(Level level);
/// Residual of the collision operator on equilibria.
CheckResult check_stationarity(Level level);
/// Weak form with test functions 1 and x.
CheckResult check_weak_zeros(Level level);
/// phi(T) <= phi(0)/kappa on short runs inside the kappa time window.
CheckResult check_kappa(Level level);
/// Riccati inequality on a subcritical and a supercritical trajectory.
CheckResult check_riccati(Level level);
/// Growth of sup x f and the profile exponent of the supercritical run.
CheckResult check_blowup(Level level);
/// f <= Phi on a run started below min(1, 1/x).
CheckResult check_comparison(Level level);
/// Mass bound on random measures and the reference window geometries.
CheckResult check_gbeta(Level level);
/// Singular data over the calibrated existence horizon.
CheckResult check_singular(Level level);

/// All checks, in acceptance order.
std::vector<CheckResult> run_verify(Level level);

}  // namespace bn
