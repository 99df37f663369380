#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bn/grid.hpp"
#include "bn/trajectory.hpp"

namespace bn {

/// Parameters of the norms recorded after every step.
struct DiagnosticsSettings {
  double delta = 1.0;
  double wsup_alpha = 0.0;
  double wsup_gamma = 9.0;
  double gbeta = 1.2;
};

/// max_i x_i^alpha (1 + x_i)^gamma f_i
double weighted_sup(const Distribution& dist, double alpha, double gamma);

/// max_i x_i f_i
double sup_xf(const Distribution& dist);

/// \int_0^delta f dx, splitting the cell that straddles delta.
double local_mass(const Distribution& dist, double delta);

/// sup over window origins R >= 0 of \int_R^{R+1} e^{beta x} f(x) dx.
double gbeta_norm(const Distribution& dist, double beta);

/// Window integral for one origin; never exceeds gbeta_norm.
double gbeta_window(const Distribution& dist, double beta, double origin);

DiagnosticsRecord make_record(const Distribution& dist, const DiagnosticsSettings& settings, double dt);

/**
 * kappa = 1 - 2.5e/(gamma-1)
 *         - (2^{alpha+gamma+1} gamma^{3/2}/(gamma-1) e(f) + 2^gamma (2-alpha)/(1-alpha) c(T)
 *            + (1 + 2^{alpha+gamma+1}) c(T)^2) T
 * Requires gamma > 2.5e + 1.
 */
double kappa_bound(double gamma, double alpha, double T, double cT, double energy);

/// Largest T with kappa_bound(...) >= kappa_min.
double kappa_time_window(double gamma, double alpha, double cT, double energy, double kappa_min);

/// 1/sqrt(2(t* - t)) - max(mass/sqrt(delta), 1 + delta)
double blowup_lower_bound(double t, double t_star, double mass, double delta);

/// max(mass/sqrt(delta), 1 + delta)
double riccati_constant(double mass, double delta);

struct RiccatiViolation {
  std::size_t record = 0;
  double time = 0.0;
  double derivative = 0.0;
  double bound = 0.0;
};

struct RiccatiReport {
  std::size_t checked = 0;
  std::vector<RiccatiViolation> violations;
  /// max over checked records of derivative / bound
  double max_ratio = 0.0;
  bool pass() const { return violations.empty(); }
};

/**
 * Central-difference check of d/dt l_delta <= (l_delta + C)^3 on interior
 * records, with 5% relative slack plus an O(dt^2) truncation allowance.
 * `delta` must match the delta the trajectory was recorded with.
 */
RiccatiReport riccati_check(const Trajectory& traj, double delta, double slack = 0.05);

struct BlowupFit {
  double t_star = 0.0;
  /// Power f ~ x^{-exponent} over [window_lo, window_hi], the decade starting
  /// ten times past the peak of x f (the edge of the collapsing core).
  double exponent = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  /// Same regression over [x_1, 10 x_1].
  double origin_exponent = 0.0;
  /// Slope c of the fit 1/l_delta^2 = c (t* - t); the lower-bound form has c = 2.
  double c_offset = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  double residual = 0.0;
  double exponent_residual = 0.0;
};

/// Blow-up time from 1/l_delta^2 ~ c (t* - t). Throws if l_delta grew less than 3x.
BlowupFit fit_blowup_time(const std::vector<double>& t, const std::vector<double>& l_delta);

/// -slope of log f against log x over the nodes in [lo, hi].
double fit_profile_exponent(const Distribution& dist, double lo, double hi, double* residual = nullptr);
/// Over [x_1, 10 x_1].
double fit_profile_exponent(const Distribution& dist, double* residual = nullptr);
/// Node where x f is largest.
double profile_peak(const Distribution& dist);

/// Blow-up time plus profile exponents of the last snapshot.
BlowupFit blowup_fit(const Trajectory& traj, double delta);

/// x -> C min(lambda(t), 1/x) with lambda(t) = exp(C t (2 e(f) + 11 C^2 + 2 C)).
double comparison_lambda(double t, double C, double energy);
std::function<double(double)> comparison_profile(double t, double C, double energy);

struct ComparisonReport {
  bool pass = false;
  /// first failing (snapshot index, node) for the requested C
  std::optional<std::pair<std::size_t, std::size_t>> first_violation;
  /// smallest C in [1, 2^10] for which the whole trajectory passes (infinity if none)
  double min_C = 0.0;
  /// smallest passing C for each snapshot separately
  std::vector<double> needed_C;
  std::vector<double> times;
};

/// Checks f(x_i, t) <= Phi(x_i, t) on every stored snapshot.
ComparisonReport verify_comparison(const Trajectory& traj, double C, double t_max = -1.0);

/// a_i / (2 sqrt(x_i) m(f)) at every node.
std::vector<double> loss_lowerbound_ratios(const Distribution& dist);
double loss_lowerbound_ratio(const Distribution& dist);

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& rows);
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is);

}  // namespace bn
