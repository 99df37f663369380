#include "bn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "bn/collision.hpp"

namespace bn {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::reached_t_end: return "reached_t_end";
    case StopReason::blowup_threshold: return "blowup_threshold";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::numeric_fault: return "numeric_fault";
  }
  return "none";
}

StopReason stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::reached_t_end, StopReason::blowup_threshold, StopReason::step_underflow,
                 StopReason::numeric_fault}) {
    if (to_string(r) == s) return r;
  }
  return StopReason::none;
}

double weighted_sup(const Distribution& dist, double alpha, double gamma) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("weighted_sup: alpha must lie in [0, 1)");
  if (!(gamma >= 0.0)) throw std::invalid_argument("weighted_sup: gamma must be >= 0");
  const auto x = dist.grid->nodes();
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double weight = (alpha == 0.0 ? 1.0 : std::pow(x[i], alpha)) * std::pow(1.0 + x[i], gamma);
    best = std::max(best, weight * dist.values[i]);
  }
  return best;
}

double sup_xf(const Distribution& dist) {
  const auto x = dist.grid->nodes();
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, x[i] * dist.values[i]);
  return best;
}

double local_mass(const Distribution& dist, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("local_mass: delta must be positive");
  if (delta >= dist.grid->x_max()) return integrate(dist, 0.0);
  return dist.grid->integrate_range(dist.values, 0.0, delta);
}

namespace {

std::vector<double> exp_weighted(const Distribution& dist, double beta) {
  const auto x = dist.grid->nodes();
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = std::exp(beta * x[i]) * dist.values[i];
  return h;
}

}  // namespace

double gbeta_window(const Distribution& dist, double beta, double origin) {
  const auto h = exp_weighted(dist, beta);
  return dist.grid->integrate_range(h, origin, origin + 1.0);
}

double gbeta_norm(const Distribution& dist, double beta) {
  const auto h = exp_weighted(dist, beta);
  const auto x = dist.grid->nodes();
  const auto window = [&](double r) { return dist.grid->integrate_range(h, r, r + 1.0); };
  // The window integral is smooth between the breakpoints {x_i} and {x_i - 1}; R -> 0+ is admitted.
  std::vector<double> breaks{0.0};
  for (double xi : x) {
    breaks.push_back(xi);
    if (xi > 1.0) breaks.push_back(xi - 1.0);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const auto slope = [&](double r) { return sample_nodes(x, h, r + 1.0) - sample_nodes(x, h, r); };
  double best = 0.0;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    best = std::max(best, window(breaks[k]));
    if (k + 1 == breaks.size()) break;
    const double lo = breaks[k], hi = breaks[k + 1];
    // interior maximum where h(R+1) - h(R) crosses zero downwards
    const double mid_lo = lo + 1e-9 * (hi - lo), mid_hi = hi - 1e-9 * (hi - lo);
    if (slope(mid_lo) > 0.0 && slope(mid_hi) < 0.0) {
      const auto r = boost::math::tools::brent_find_minima([&](double t) { return -window(t); }, lo, hi, 40);
      best = std::max(best, -r.second);
    }
  }
  return best;
}

DiagnosticsRecord make_record(const Distribution& dist, const DiagnosticsSettings& s, double dt) {
  DiagnosticsRecord r;
  r.time = dist.time;
  r.mass = mass(dist);
  r.energy = energy(dist);
  r.l1_total = integrate(dist, 0.0);
  r.l1_local = local_mass(dist, s.delta);
  r.wsup = weighted_sup(dist, s.wsup_alpha, s.wsup_gamma);
  r.supxf = sup_xf(dist);
  r.gbeta = gbeta_norm(dist, s.gbeta);
  r.dt = dt;
  return r;
}

double kappa_bound(double gamma, double alpha, double T, double cT, double energy) {
  constexpr double e = std::numbers::e;
  if (!(gamma > 2.5 * e + 1.0)) throw std::invalid_argument("kappa_bound: gamma must exceed 2.5e + 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("kappa_bound: alpha must lie in [0, 1)");
  const double p = std::pow(2.0, alpha + gamma + 1.0);
  const double slope = p * std::pow(gamma, 1.5) / (gamma - 1.0) * energy + std::pow(2.0, gamma) * (2.0 - alpha) / (1.0 - alpha) * cT +
                       (1.0 + p) * cT * cT;
  return 1.0 - 2.5 * e / (gamma - 1.0) - slope * T;
}

double kappa_time_window(double gamma, double alpha, double cT, double energy, double kappa_min) {
  const double k0 = kappa_bound(gamma, alpha, 0.0, cT, energy);
  const double k1 = kappa_bound(gamma, alpha, 1.0, cT, energy);
  const double slope = k0 - k1;
  if (!(k0 > kappa_min) || !(slope > 0.0)) return 0.0;
  return (k0 - kappa_min) / slope;
}

double riccati_constant(double mass, double delta) { return std::max(mass / std::sqrt(delta), 1.0 + delta); }

double blowup_lower_bound(double t, double t_star, double mass, double delta) {
  if (!(t < t_star)) throw std::invalid_argument("blowup_lower_bound: t must be before t_star");
  if (!(delta > 0.0)) throw std::invalid_argument("blowup_lower_bound: delta must be positive");
  return 1.0 / std::sqrt(2.0 * (t_star - t)) - riccati_constant(mass, delta);
}

RiccatiReport riccati_check(const Trajectory& traj, double delta, double slack) {
  if (std::abs(delta - traj.delta) > 1e-12 * std::max(1.0, delta))
    throw std::invalid_argument("riccati_check: trajectory was recorded with a different delta");
  const auto& r = traj.records;
  RiccatiReport rep;
  if (r.size() < 3) return rep;
  for (std::size_t n = 1; n + 1 < r.size(); ++n) {
    const double hm = r[n].time - r[n - 1].time;
    const double hp = r[n + 1].time - r[n].time;
    const double deriv = (r[n + 1].l1_local - r[n - 1].l1_local) / (hm + hp);

    // Leading truncation terms of the nonuniform central difference:
    // (hp - hm)/2 l'' + hp hm / 6 l''', with divided-difference estimates.
    const double d1m = (r[n].l1_local - r[n - 1].l1_local) / hm;
    const double d1p = (r[n + 1].l1_local - r[n].l1_local) / hp;
    const double l2 = 2.0 * (d1p - d1m) / (hm + hp);
    double l3 = 0.0;
    if (n + 2 < r.size()) {
      const double hpp = r[n + 2].time - r[n + 1].time;
      const double d1pp = (r[n + 2].l1_local - r[n + 1].l1_local) / hpp;
      const double l2p = 2.0 * (d1pp - d1p) / (hp + hpp);
      l3 = 3.0 * (l2p - l2) / (hm + hp + hpp);
    }
    const double allowance = 0.5 * std::abs(hp - hm) * std::abs(l2) + hp * hm / 6.0 * std::abs(l3);

    const double c = riccati_constant(r[n].mass, delta);
    const double bound = std::pow(r[n].l1_local + c, 3.0);
    ++rep.checked;
    rep.max_ratio = std::max(rep.max_ratio, deriv / bound);
    if (deriv > bound * (1.0 + slack) + allowance) rep.violations.push_back({n, r[n].time, deriv, bound});
  }
  return rep;
}

namespace {

struct LineFit {
  double intercept = 0.0, slope = 0.0, rms = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

BlowupFit fit_blowup_time(const std::vector<double>& t, const std::vector<double>& l) {
  if (t.size() != l.size() || t.size() < 3) throw std::invalid_argument("blowup_fit: need at least 3 records");
  const double l_min = *std::min_element(l.begin(), l.end());
  const double l_end = l.back();
  if (!(l_min > 0.0) || l_end < 3.0 * l_min) throw std::runtime_error("blowup_fit: l_delta grew less than 3x, fit refused");

  // last decade of growth: records with l >= l_end / 10
  std::size_t first = l.size() - 1;
  while (first > 0 && l[first - 1] >= l_end / 10.0) --first;
  if (l.size() - first < 3) first = l.size() - 3;

  std::vector<double> ts, ys;
  for (std::size_t i = first; i < l.size(); ++i) {
    ts.push_back(t[i]);
    ys.push_back(1.0 / (l[i] * l[i]));
  }
  const LineFit lf = least_squares(ts, ys);
  BlowupFit fit;
  fit.c_offset = -lf.slope;
  fit.t_star = -lf.intercept / lf.slope;
  fit.t_lo = ts.front();
  fit.t_hi = ts.back();
  fit.residual = lf.rms;
  if (!(fit.c_offset > 0.0)) throw std::runtime_error("blowup_fit: 1/l_delta^2 is not decreasing over the fit window");
  return fit;
}

double fit_profile_exponent(const Distribution& dist, double lo, double hi, double* residual) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("profile fit: need 0 < lo < hi");
  const auto x = dist.grid->nodes();
  std::vector<double> lx, lf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo * (1.0 - 1e-12) || x[i] > hi * (1.0 + 1e-12)) continue;
    if (!(dist.values[i] > 0.0)) throw std::runtime_error("profile fit: non-positive f in the fit window");
    lx.push_back(std::log(x[i]));
    lf.push_back(std::log(dist.values[i]));
  }
  if (lx.size() < 2) throw std::runtime_error("profile fit: fewer than two nodes in the fit window");
  const LineFit f = least_squares(lx, lf);
  if (residual) *residual = f.rms;
  return -f.slope;
}

double fit_profile_exponent(const Distribution& dist, double* residual) {
  const double x1 = dist.grid->node(0);
  return fit_profile_exponent(dist, x1, 10.0 * x1, residual);
}

double profile_peak(const Distribution& dist) {
  const auto x = dist.grid->nodes();
  double best = -1.0, at = x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] * dist.values[i];
    if (v > best) {
      best = v;
      at = x[i];
    }
  }
  return at;
}

BlowupFit blowup_fit(const Trajectory& traj, double delta) {
  if (traj.stop_reason != StopReason::blowup_threshold && traj.stop_reason != StopReason::step_underflow)
    throw std::invalid_argument("blowup_fit: trajectory did not stop on blow-up or step underflow");
  if (std::abs(delta - traj.delta) > 1e-12 * std::max(1.0, delta))
    throw std::invalid_argument("blowup_fit: trajectory was recorded with a different delta");
  std::vector<double> t, l;
  for (const auto& r : traj.records) {
    t.push_back(r.time);
    l.push_back(r.l1_local);
  }
  BlowupFit fit = fit_blowup_time(t, l);
  if (!traj.snapshots.empty()) {
    const Distribution& last = traj.snapshots.back();
    fit.origin_exponent = fit_profile_exponent(last, nullptr);
    // first decade of the power-law tail: one decade past the peak of x f
    fit.window_lo = 10.0 * profile_peak(last);
    fit.window_hi = 10.0 * fit.window_lo;
    if (fit.window_hi <= last.grid->x_max()) fit.exponent = fit_profile_exponent(last, fit.window_lo, fit.window_hi, &fit.exponent_residual);
    else fit.exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

double comparison_lambda(double t, double C, double energy) {
  return std::exp(C * t * (2.0 * energy + 11.0 * C * C + 2.0 * C));
}

std::function<double(double)> comparison_profile(double t, double C, double energy) {
  if (!(C >= 1.0)) throw std::invalid_argument("comparison_profile: C must be >= 1");
  const double lambda = comparison_lambda(t, C, energy);
  return [C, lambda](double x) { return C * (x > 0.0 ? std::min(lambda, 1.0 / x) : lambda); };
}

namespace {

bool snapshot_passes(const Distribution& d, double C, double energy, std::size_t* bad_node) {
  const auto x = d.grid->nodes();
  const double lambda = comparison_lambda(d.time, C, energy);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double bound = C * std::min(lambda, 1.0 / x[i]);
    if (d.values[i] > bound * (1.0 + 1e-12)) {
      if (bad_node) *bad_node = i;
      return false;
    }
  }
  return true;
}

double smallest_C(const std::vector<const Distribution*>& snaps, const std::vector<double>& energies) {
  auto ok = [&](double C) {
    for (std::size_t s = 0; s < snaps.size(); ++s)
      if (!snapshot_passes(*snaps[s], C, energies[s], nullptr)) return false;
    return true;
  };
  constexpr double c_max = 1024.0;
  if (ok(1.0)) return 1.0;
  if (!ok(c_max)) return std::numeric_limits<double>::infinity();
  double lo = 1.0, hi = c_max;
  for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

ComparisonReport verify_comparison(const Trajectory& traj, double C, double t_max) {
  if (traj.snapshots.empty()) throw std::invalid_argument("verify_comparison: trajectory has no snapshots");
  const Distribution& f0 = traj.snapshots.front();
  const auto x0 = f0.grid->nodes();
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (f0.values[i] > std::min(1.0, 1.0 / x0[i]) * (1.0 + 1e-12))
      throw std::invalid_argument("verify_comparison: initial data exceed min(1, 1/x)");
  }

  std::vector<const Distribution*> snaps;
  std::vector<double> energies;
  for (const auto& s : traj.snapshots) {
    if (t_max >= 0.0 && s.time > t_max) break;
    snaps.push_back(&s);
    energies.push_back(energy(s));
  }

  ComparisonReport rep;
  rep.pass = true;
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    std::size_t bad = 0;
    if (!snapshot_passes(*snaps[s], C, energies[s], &bad)) {
      rep.pass = false;
      rep.first_violation = std::make_pair(s, bad);
      break;
    }
  }
  rep.min_C = smallest_C(snaps, energies);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    rep.needed_C.push_back(smallest_C({snaps[s]}, {energies[s]}));
    rep.times.push_back(snaps[s]->time);
  }
  return rep;
}

std::vector<double> loss_lowerbound_ratios(const Distribution& dist) {
  const double m = mass(dist);
  if (!(m > 0.0)) throw std::invalid_argument("loss_lowerbound_ratio: distribution has zero mass");
  const auto a = loss_rate(dist);
  const auto x = dist.grid->nodes();
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a[i] / (2.0 * std::sqrt(x[i]) * m);
  return r;
}

double loss_lowerbound_ratio(const Distribution& dist) {
  const auto r = loss_lowerbound_ratios(dist);
  return *std::min_element(r.begin(), r.end());
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& rows) {
  os << "t,mass,energy,l1_total,l1_local,wsup,supxf,gbeta,dt\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : rows) {
    line.str("");
    line << r.time << ',' << r.mass << ',' << r.energy << ',' << r.l1_total << ',' << r.l1_local << ',' << r.wsup << ','
         << r.supxf << ',' << r.gbeta << ',' << r.dt << '\n';
    os << line.str();
  }
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,mass,energy", 0) != 0)
    throw std::runtime_error("diagnostics csv: missing header");
  std::vector<DiagnosticsRecord> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v[9];
    for (int k = 0; k < 9; ++k) {
      std::string cell;
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("diagnostics csv: short row at line " + std::to_string(lineno));
      v[k] = std::stod(cell);
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return rows;
}

}  // namespace bn
