#include "bn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "bn/collision.hpp"
#include "bn/diagnostics.hpp"
#include "bn/equilibrium.hpp"
#include "bn/measures.hpp"
#include "bn/oracle.hpp"

namespace bn {

std::string to_string(Level level) { return level == Level::fast ? "fast" : "full"; }

Level level_from_string(const std::string& s) {
  if (s == "fast") return Level::fast;
  if (s == "full") return Level::full;
  throw std::invalid_argument("unknown verify level '" + s + "'");
}

GridPtr geometric_grid(int nodes, double x_max, double x1) {
  if (nodes < 2 || !(x1 > 0.0) || !(x1 < x_max / nodes))
    throw std::invalid_argument("geometric_grid: need x1 below the uniform spacing");
  auto first = [&](double r) { return x_max * (r - 1.0) / (std::pow(r, nodes) - 1.0) - x1; };
  boost::math::tools::eps_tolerance<double> tol(50);
  auto [lo, hi] = boost::math::tools::bisect(first, 1.0 + 1e-9, 4.0, tol);
  GridSpec spec;
  spec.node_count = nodes;
  spec.x_max = x_max;
  spec.grading = Grading::geometric(0.5 * (lo + hi));
  return build_grid(spec);
}

Distribution supercritical_data(const GridPtr& grid, double ratio, double power) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = grid->node(i);
    v[i] = std::pow(x, -power) * std::exp(-x);
  }
  Distribution unit(grid, v);
  // mass ~ A and critical_mass(energy) ~ A^{3/5}, so the ratio scales as A^{2/5}
  const double r1 = mass(unit) / critical_mass(energy(unit));
  const double A = std::pow(ratio / r1, 2.5);
  for (double& f : v) f *= A;
  return Distribution(grid, v);
}

namespace {

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_ = Clock::now();
};

GridPtr power_grid(int nodes, double x_max = 20.0) {
  GridSpec spec;
  spec.node_count = nodes;
  spec.x_max = x_max;
  spec.grading = Grading::power(2.0);
  return build_grid(spec);
}

double rel_gap(const std::vector<double>& a, const std::vector<double>& ref) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - ref[i]);
    if (d == 0.0) continue;
    worst = std::max(worst, ref[i] != 0.0 ? d / std::abs(ref[i]) : INFINITY);
  }
  return worst;
}

// Equilibrium with a Gaussian bump on top: smooth, off-equilibrium, BE-like.
Distribution bumped_be(const GridPtr& grid) {
  BEParams p;
  p.alpha = 1.0;
  p.beta = 1.0;
  Distribution d = be_distribution(p, grid);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = grid->node(i);
    d.values[i] *= 1.0 + 0.5 * std::exp(-std::pow((x - 2.0) / 0.7, 2));
  }
  return d;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Drift {
  double per_time = 0.0;  // max of the relative mass and energy drift over the run, per unit time
  double per_step = 0.0;  // largest single-step relative change
  std::size_t steps = 0;
};

Drift measure_drift(const Trajectory& tr) {
  const auto& R = tr.records;
  Drift d;
  d.steps = R.size() - 1;
  const double m0 = R.front().mass, e0 = R.front().energy;
  d.per_time = std::max(std::abs(R.back().mass - m0) / m0, std::abs(R.back().energy - e0) / e0) / R.back().time;
  for (std::size_t k = 1; k < R.size(); ++k)
    d.per_step = std::max({d.per_step, std::abs(R[k].mass - R[k - 1].mass) / m0, std::abs(R[k].energy - R[k - 1].energy) / e0});
  return d;
}

struct SupercriticalSetup {
  int nodes;
  double threshold;
  double growth_required;
};

SupercriticalSetup supercritical_setup(Level level) {
  if (level == Level::fast) return {64, 1e2, 1e2};
  return {256, 1e3, 1e3};
}

// One run per level and process; shared by the Riccati and blow-up checks.
const RunResult& supercritical_run(Level level) {
  static std::map<Level, RunResult> cache;
  auto it = cache.find(level);
  if (it != cache.end()) return it->second;
  const auto setup = supercritical_setup(level);
  // Reaching 10^3 growth of sup x f needs the core resolved down to ~1e-12.
  const GridPtr grid = geometric_grid(setup.nodes, 20.0, 1e-16);
  StepControls controls;
  controls.t_end = 50.0;
  controls.blowup_threshold = setup.threshold;
  RunOptions options;
  options.quadrature = Quadrature::blended;
  options.snapshot_stride = 50;
  return cache.emplace(level, run(supercritical_data(grid, 2.0), controls, options)).first->second;
}

}  // namespace

CheckResult check_oracle(Level level) {
  Timer timer;
  CheckResult r{"oracle_equivalence", false, {}, {}, 0.0};
  const int cases = level == Level::full ? 50 : 10;
  const GridPtr grid = power_grid(24);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double nodal = 0.0, blended = 0.0;
  for (int c = 0; c < cases; ++c) {
    std::vector<double> v(grid->size());
    const double decay = 0.1 + 2.0 * unit(rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 3.0 * unit(rng) * std::exp(-decay * grid->node(i));
    const Distribution d(grid, v);
    for (auto q : {Quadrature::nodal, Quadrature::blended}) {
      const auto got = collision_rates(d, q);
      const auto ref = loss_gain_oracle(d, q);
      double& worst = q == Quadrature::nodal ? nodal : blended;
      worst = std::max({worst, rel_gap(got.loss, ref.loss), rel_gap(got.gain, ref.gain)});
    }
  }
  r.pass = nodal <= 1e-12 && blended <= 1e-12;
  r.metrics = {{"cases", cases}, {"nodal_rel_gap", nodal}, {"blended_rel_gap", blended}};
  r.detail = "max relative gap " + fmt(std::max(nodal, blended)) + " over " + std::to_string(cases) + " cases (limit 1e-12)";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_conservation(Level level) {
  Timer timer;
  CheckResult r{"conservation", false, {}, {}, 0.0};
  const std::vector<int> sizes = level == Level::full ? std::vector<int>{64, 128, 256} : std::vector<int>{64, 128};
  StepControls controls;
  controls.t_end = 1.0;
  std::vector<double> drift;
  double remap_step = 0.0;
  for (int n : sizes) {
    const Distribution d = bumped_be(power_grid(n));
    RunOptions options;
    options.snapshot_stride = 1 << 20;
    options.remap = false;
    drift.push_back(measure_drift(run(d, controls, options).trajectory).per_time);
    options.remap = true;
    remap_step = std::max(remap_step, measure_drift(run(d, controls, options).trajectory).per_step);
    r.metrics.emplace_back("drift_per_time_N" + std::to_string(n), drift.back());
  }
  double worst_ratio = INFINITY;
  for (std::size_t k = 1; k < drift.size(); ++k) worst_ratio = std::min(worst_ratio, drift[k - 1] / drift[k]);
  r.metrics.emplace_back("worst_refinement_ratio", worst_ratio);
  r.metrics.emplace_back("remap_drift_per_step", remap_step);
  r.pass = worst_ratio >= 3.0 && remap_step <= 1e-12;
  r.detail = "drift falls " + fmt(worst_ratio) + "x per doubling (need 3); remapped step drift " + fmt(remap_step) +
             " (limit 1e-12)";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_stationarity(Level level) {
  Timer timer;
  CheckResult r{"be_stationarity", true, {}, {}, 0.0};
  const std::vector<int> sizes = level == Level::full ? std::vector<int>{128, 256, 512} : std::vector<int>{128, 256};
  double worst_first = 0.0, worst_ratio = INFINITY;
  for (double alpha : {0.5, 1.0, 2.0}) {
    BEParams p;
    p.alpha = alpha;
    p.beta = 1.0;
    double prev = 0.0;
    for (int n : sizes) {
      const Distribution d = be_distribution(p, power_grid(n));
      const auto rates = collision_rates(d);
      double q = 0.0, j = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        q = std::max(q, std::abs(rates.gain[i] - d.values[i] * rates.loss[i]));
        j = std::max(j, rates.gain[i]);
      }
      const double residual = q / j;
      r.metrics.emplace_back("alpha" + fmt(alpha) + "_N" + std::to_string(n), residual);
      if (n == sizes.front()) worst_first = std::max(worst_first, residual);
      else worst_ratio = std::min(worst_ratio, prev / residual);
      prev = residual;
    }
  }
  r.pass = worst_first <= 5e-3 && worst_ratio >= 3.0;
  r.detail = "max|Q|/max J = " + fmt(worst_first) + " at N=128 (limit 5e-3), falls " + fmt(worst_ratio) +
             "x per doubling (need 3)";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_weak_zeros(Level) {
  Timer timer;
  CheckResult r{"weak_form_zeros", false, {}, {}, 0.0};
  double one = 0.0, lin = 0.0;
  for (int n : {32, 64}) {
    for (const Distribution& d : {bumped_be(power_grid(n)), supercritical_data(power_grid(n), 1.5)}) {
      one = std::max(one, std::abs(weak_action(d, [](double) { return 1.0; })));
      const auto parts = weak_action_parts(d, [](double x) { return x; });
      lin = std::max(lin, std::abs(parts.total()) / parts.magnitude);
    }
  }
  r.pass = one == 0.0 && lin <= 1e-13;
  r.metrics = {{"phi_one", one}, {"phi_x_relative", lin}};
  r.detail = "phi=1 gives " + fmt(one) + ", phi=x gives " + fmt(lin) + " of the magnitude (limit 1e-13)";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_kappa(Level level) {
  Timer timer;
  CheckResult r{"kappa_consistency", true, {}, {}, 0.0};
  const int n = level == Level::full ? 64 : 32;
  const double gamma = 9.0, alpha = 0.0, kappa_min = 0.05;
  const GridPtr grid = power_grid(n);
  double worst = 0.0;
  for (int c = 0; c < 5; ++c) {
    std::vector<double> v(grid->size());
    const double center = 0.5 + 0.5 * c, height = 0.5 + 0.3 * c;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = grid->node(i);
      v[i] = height * std::exp(-std::pow((x - center) / 0.6, 2)) + 0.2 * std::exp(-2.0 * x);
    }
    const Distribution d(grid, v);
    // The window is sized for a c(T) with 20% headroom; kappa is then recomputed from the measured c(T).
    const double T = kappa_time_window(gamma, alpha, 1.2 * integrate(d, 0.0), energy(d), kappa_min);
    StepControls controls;
    controls.t_end = T;
    controls.dt_init = T / 20.0;
    controls.dt_max = T / 10.0;
    RunOptions options;
    options.diagnostics.wsup_alpha = alpha;
    options.diagnostics.wsup_gamma = gamma;
    const RunResult result = run(d, controls, options);
    const auto& R = result.trajectory.records;
    double cT = 0.0, phi = 0.0;
    for (const auto& rec : R) {
      cT = std::max(cT, rec.l1_total);
      phi = std::max(phi, rec.wsup);
    }
    const double kappa = kappa_bound(gamma, alpha, T, cT, energy(d));
    const double bound = R.front().wsup / kappa * 1.05;
    worst = std::max(worst, phi / bound);
    r.metrics.emplace_back("case" + std::to_string(c) + "_kappa", kappa);
    if (!(kappa > 0.0) || phi > bound) r.pass = false;
  }
  r.metrics.emplace_back("worst_phi_over_bound", worst);
  r.detail = "worst phi(T) / (phi(0)/kappa * 1.05) = " + fmt(worst) + " over 5 runs";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_riccati(Level level) {
  Timer timer;
  CheckResult r{"riccati", false, {}, {}, 0.0};
  const int n = level == Level::full ? 256 : 64;
  StepControls controls;
  controls.t_end = 1.0;
  RunOptions options;
  options.snapshot_stride = 1 << 20;
  const auto sub = riccati_check(run(bumped_be(power_grid(n)), controls, options).trajectory, 1.0);
  const auto& super = supercritical_run(level).trajectory;
  const auto sup = riccati_check(super, 1.0);
  r.pass = sub.pass() && sup.pass() && sub.checked > 0 && sup.checked > 0;
  r.metrics = {{"subcritical_violations", double(sub.violations.size())},
               {"subcritical_max_ratio", sub.max_ratio},
               {"supercritical_violations", double(sup.violations.size())},
               {"supercritical_max_ratio", sup.max_ratio}};
  r.detail = std::to_string(sub.violations.size() + sup.violations.size()) + " violations; max derivative/bound " +
             fmt(std::max(sub.max_ratio, sup.max_ratio));
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_blowup(Level level) {
  Timer timer;
  CheckResult r{"blowup", false, {}, {}, 0.0};
  const auto setup = supercritical_setup(level);
  const auto& tr = supercritical_run(level).trajectory;
  const double growth = tr.records.back().supxf / tr.records.front().supxf;
  r.metrics = {{"supxf_growth", growth}, {"stop_time", tr.records.back().time}};
  if (tr.stop_reason != StopReason::blowup_threshold) {
    r.detail = "stopped on " + to_string(tr.stop_reason);
  } else {
    const BlowupFit fit = blowup_fit(tr, 1.0);
    r.metrics.insert(r.metrics.end(), {{"t_star", fit.t_star},
                                       {"exponent", fit.exponent},
                                       {"distance_to_1.234", std::abs(fit.exponent - 1.234)},
                                       {"window_lo", fit.window_lo},
                                       {"origin_exponent", fit.origin_exponent}});
    r.pass = growth >= setup.growth_required && fit.exponent > 1.0 && fit.exponent < 1.5;
    r.detail = "sup xf grew " + fmt(growth) + "x; exponent " + fmt(fit.exponent) + ", |nu - 1.234| = " +
               fmt(std::abs(fit.exponent - 1.234));
  }
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_comparison(Level level) {
  Timer timer;
  CheckResult r{"comparison_bound", false, {}, {}, 0.0};
  const GridPtr grid = power_grid(level == Level::full ? 128 : 64);
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = grid->node(i);
    v[i] = std::min(1.0, 1.0 / x) * std::exp(-x / 4.0);
  }
  StepControls controls;
  controls.t_end = 0.5;
  RunOptions options;
  const RunResult result = run(Distribution(grid, v), controls, options);
  const auto report = verify_comparison(result.trajectory, 1.0, 0.5);
  r.pass = std::isfinite(report.min_C) && report.min_C <= 1024.0;
  r.metrics = {{"min_C", report.min_C}, {"snapshots", double(report.times.size())}};
  r.detail = "smallest passing C = " + fmt(report.min_C) + " (limit 1024)";
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_gbeta(Level level) {
  Timer timer;
  CheckResult r{"gbeta_properties", true, {}, {}, 0.0};
  const int measures = level == Level::full ? 10000 : 1000;
  const double beta = 1.2;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 40);
  std::lognormal_distribution<double> weight(0.0, 1.5);
  const GridPtr density_grid = power_grid(48, 12.0);
  int failures = 0;
  double worst = 0.0;
  for (int m = 0; m < measures; ++m) {
    RadonMeasure mu;
    const double spread = 0.5 + 9.5 * unit(rng);
    for (int a = count(rng); a > 0; --a) mu.atoms.push_back({spread * unit(rng), weight(rng)});
    if (m % 4 == 0) {
      std::vector<double> v(density_grid->size());
      const double center = 10.0 * unit(rng), width = 0.05 + unit(rng), height = weight(rng);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = height * std::exp(-std::pow((density_grid->node(i) - center) / width, 2));
      mu.density = Distribution(density_grid, v);
    }
    const auto mb = mass_bound_check(mu, beta);
    if (!mb.pass) ++failures;
    if (mb.bound > 0.0) worst = std::max(worst, mb.total_mass / mb.bound);
  }
  r.metrics = {{"measures", measures}, {"failures", failures}, {"worst_mass_over_bound", worst}};
  if (failures > 0) r.pass = false;

  auto close = [&](const std::string& name, double got, double want) {
    const double err = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
    r.metrics.emplace_back(name, err);
    if (!(err <= 0.01)) r.pass = false;
  };
  close("atom_at_2", gbeta_norm_measure({{{2.0, 1.0}}, {}}, 1.0), std::exp(2.0));
  close("atoms_far_apart", gbeta_norm_measure({{{0.25, 1.0}, {1.75, 1.0}}, {}}, 1.0), std::exp(1.75));
  close("atoms_close", gbeta_norm_measure({{{0.2, 1.0}, {0.9, 1.0}}, {}}, 1.0), std::exp(0.2) + std::exp(0.9));
  {
    GridSpec spec;
    spec.node_count = 4000;
    spec.x_max = 4.0;
    spec.grading = Grading::uniform();
    const GridPtr fine = build_grid(spec);
    std::vector<double> v(fine->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow((fine->node(i) - 2.0) / 0.01, 2));
    Distribution bump(fine, v);
    const double l1 = integrate(bump, 0.0);
    for (double& f : bump.values) f /= l1;
    close("density_bump_at_2", gbeta_norm(bump, 1.0), std::exp(2.0));
    close("density_zero", gbeta_norm(Distribution::zeros(fine), 1.0), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-2.0 * fine->node(i));
    close("density_exp", gbeta_norm(Distribution(fine, v), 1.0), 1.0 - std::exp(-1.0));
  }
  r.detail = std::to_string(failures) + " of " + std::to_string(measures) + " measures break the mass bound; " +
             "reference geometries " + (r.pass ? "within 1%" : "off by more than 1%");
  r.seconds = timer.seconds();
  return r;
}

CheckResult check_singular(Level level) {
  Timer timer;
  CheckResult r{"singular_local_existence", false, {}, {}, 0.0};
  const double beta = 1.2;
  const GridPtr grid = power_grid(level == Level::full ? 128 : 64);
  // calibration on smooth bumps, separate from the singular data
  std::vector<CalibrationCase> cases;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = grid->node(i);
      v[i] = (0.5 + 0.5 * c) * std::exp(-std::pow((x - 1.0 - c) / 0.5, 2)) + 0.1 * std::exp(-2.0 * x);
    }
    Distribution d(grid, v);
    const double norm = gbeta_norm(d, beta);
    cases.push_back({std::move(d), 1.5 * norm});
  }
  StepControls controls;
  const auto cal = calibrate_horizon(cases, beta, 2.0, controls, Scheme::etd_midpoint);

  const Distribution f0 = singular_init(0.75, 1.0, 2.0, grid);
  const double norm0 = gbeta_norm(f0, beta);
  const double kappa = 1.5 * norm0;
  const double horizon = existence_horizon(norm0, mass(f0), beta, kappa, cal.calib_C);
  r.metrics = {{"calib_C", cal.calib_C}, {"kappa", kappa}, {"horizon", horizon}};
  if (!(horizon > 0.0)) {
    r.detail = "calibrated horizon is empty";
  } else {
    controls.t_end = horizon;
    RunOptions options;
    options.diagnostics.gbeta = beta;
    const RunResult result = run(f0, controls, options);
    const Trajectory& tr = result.trajectory;
    double gmax = 0.0;
    for (const auto& rec : tr.records) gmax = std::max(gmax, rec.gbeta);
    const double step = measure_drift(tr).per_step;
    r.metrics.insert(r.metrics.end(), {{"max_gbeta", gmax}, {"drift_per_step", step}});
    r.pass = tr.stop_reason == StopReason::reached_t_end && gmax <= kappa && step <= 1e-12;
    r.detail = "over T = " + fmt(horizon) + ": max G^beta norm " + fmt(gmax) + " vs kappa " + fmt(kappa) +
               ", step drift " + fmt(step);
  }
  r.seconds = timer.seconds();
  return r;
}

std::vector<CheckResult> run_verify(Level level) {
  return {check_oracle(level),   check_conservation(level), check_stationarity(level), check_weak_zeros(level),
          check_kappa(level),    check_riccati(level),      check_blowup(level),       check_comparison(level),
          check_gbeta(level),    check_singular(level)};
}

}  // namespace bn
