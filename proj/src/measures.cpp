#include "bn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "bn/diagnostics.hpp"
#include "bn/io.hpp"

namespace bn {

void RadonMeasure::validate() const {
  for (const auto& a : atoms) {
    if (!std::isfinite(a.position) || a.position < 0.0) throw std::invalid_argument("measure: atom position must be finite and >= 0");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw std::invalid_argument("measure: atom mass must be positive");
  }
  if (density) density->validate();
}

double RadonMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  if (density) m += integrate(*density, 0.0);
  return m;
}

double gbeta_norm_measure(const RadonMeasure& mu, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("gbeta_norm_measure: beta must be positive");
  mu.validate();
  constexpr double eps = 1e-12;

  std::vector<Atom> atoms = mu.atoms;
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
  std::vector<double> pos(atoms.size()), prefix(atoms.size() + 1, 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    pos[i] = atoms[i].position;
    prefix[i + 1] = prefix[i] + atoms[i].mass * std::exp(beta * atoms[i].position);
  }
  auto atom_window = [&](double R) {
    const auto first = std::upper_bound(pos.begin(), pos.end(), R) - pos.begin();
    const auto last = std::lower_bound(pos.begin(), pos.end(), R + 1.0) - pos.begin();
    return last > first ? prefix[last] - prefix[first] : 0.0;
  };

  std::vector<double> h;
  if (mu.density) {
    const auto x = mu.density->grid->nodes();
    h.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) h[i] = std::exp(beta * x[i]) * mu.density->values[i];
  }
  auto density_window = [&](double R) { return mu.density ? mu.density->grid->integrate_range(h, R, R + 1.0) : 0.0; };

  std::vector<double> candidates{0.0};
  for (double a : pos) {
    for (double R : {a, a - eps, a + eps, a - 1.0, a - 1.0 + eps, a - 1.0 - eps}) candidates.push_back(R);
  }
  if (mu.density) {
    for (double xi : mu.density->grid->nodes()) {
      candidates.push_back(xi);
      candidates.push_back(xi - 1.0);
    }
  }

  double best = 0.0;
  for (double R : candidates) {
    if (R < 0.0) continue;
    best = std::max(best, atom_window(R) + density_window(R));
  }
  if (!mu.density) return best;

  // Between breakpoints the atom part is constant and the density part is smooth;
  // look for interior maxima where h(R+1) - h(R) crosses zero downwards.
  std::vector<double> breaks;
  for (double R : candidates) {
    if (R >= 0.0) breaks.push_back(R);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const auto x = mu.density->grid->nodes();
  const auto slope = [&](double r) { return sample_nodes(x, h, r + 1.0) - sample_nodes(x, h, r); };
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k], hi = breaks[k + 1];
    if (!(slope(lo + 1e-9 * (hi - lo)) > 0.0 && slope(hi - 1e-9 * (hi - lo)) < 0.0)) continue;
    const auto r = boost::math::tools::brent_find_minima([&](double t) { return -density_window(t); }, lo, hi, 40);
    best = std::max(best, atom_window(r.first) - r.second);
  }
  return best;
}

bool in_gbeta_class(const RadonMeasure& mu, const GBetaParams& params) {
  if (!(params.beta > 1.0)) throw std::invalid_argument("in_gbeta_class: beta must exceed 1");
  return gbeta_norm_measure(mu, params.beta) <= params.kappa;
}

MassBound mass_bound_check(const RadonMeasure& mu, double beta) {
  if (!(beta >= 1.2)) throw std::invalid_argument("mass_bound_check: beta must be >= 1.2");
  MassBound mb;
  mb.total_mass = mu.total_mass();
  mb.bound = 3.0 * gbeta_norm_measure(mu, beta);
  mb.pass = mb.total_mass <= mb.bound;
  return mb;
}

double existence_horizon(double f0_norm, double mass, double beta, double kappa, double calib_C) {
  if (!(kappa > f0_norm)) throw std::invalid_argument("existence_horizon: kappa must exceed the initial norm");
  if (!(mass > 0.0)) throw std::invalid_argument("existence_horizon: mass must be positive");
  if (!(beta > 1.0)) throw std::invalid_argument("existence_horizon: beta must exceed 1");
  if (!(calib_C > 0.0)) throw std::invalid_argument("existence_horizon: calib_C must be positive");
  const double T = (kappa - f0_norm) / (calib_C * kappa * kappa * (1.0 + kappa)) - 1.0 / (mass * std::sqrt(beta));
  return std::max(T, 0.0);
}

Distribution singular_init(double alpha, double scale, double decay, const GridPtr& grid) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("singular_init: alpha must lie in [0, 1); alpha >= 1 is not locally integrable");
  if (!(scale > 0.0) || !(decay > 0.0)) throw std::invalid_argument("singular_init: scale and decay must be positive");
  GridSpec spec = grid->spec();
  spec.singular_exponent = alpha;
  GridPtr g = build_grid(spec);
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g->node(i);
    v[i] = scale * std::pow(x, -alpha) * std::exp(-decay * x);
  }
  return Distribution(std::move(g), std::move(v));
}

Calibration calibrate_horizon(const std::vector<CalibrationCase>& cases, double beta, double t_limit,
                              const StepControls& controls, Scheme scheme) {
  Calibration cal;
  for (const auto& c : cases) {
    CalibrationOutcome out;
    out.f0_norm = gbeta_norm(c.initial, beta);
    out.mass = mass(c.initial);
    out.kappa = c.kappa;
    if (!(c.kappa > out.f0_norm)) throw std::invalid_argument("calibrate_horizon: kappa must exceed the initial norm");

    StepControls sc = controls;
    sc.t_end = t_limit;
    RunOptions opt;
    opt.scheme = scheme;
    opt.remap = true;
    opt.diagnostics.gbeta = beta;
    const RunResult rr = run(c.initial, sc, opt);

    out.exit_time = rr.trajectory.records.back().time;
    for (std::size_t k = 1; k < rr.trajectory.records.size(); ++k) {
      if (rr.trajectory.records[k].gbeta > c.kappa) {
        out.exit_time = rr.trajectory.records[k - 1].time;
        out.exited = true;
        break;
      }
    }
    if (out.exited) {
      const double k = c.kappa;
      out.implied_C = (k - out.f0_norm) / (k * k * (1.0 + k) * (out.exit_time + 1.0 / (out.mass * std::sqrt(beta))));
      cal.calib_C = std::max(cal.calib_C, out.implied_C);
    }
    cal.cases.push_back(out);
  }
  return cal;
}

void write_measure(std::ostream& os, const RadonMeasure& mu, const std::string& density_path) {
  os << std::setprecision(17);
  for (const auto& a : mu.atoms) os << "atom " << a.position << ' ' << a.mass << '\n';
  if (!density_path.empty()) os << "density " << density_path << '\n';
}

RadonMeasure read_measure(std::istream& is, const std::string& base_dir) {
  RadonMeasure mu;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "atom") {
      Atom a;
      if (!(ls >> a.position >> a.mass)) throw std::runtime_error("measure file line " + std::to_string(lineno) + ": expected 'atom <x> <mass>'");
      mu.atoms.push_back(a);
    } else if (kind == "density") {
      std::string path;
      ls >> path;
      std::filesystem::path p(path);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw std::runtime_error("measure file: cannot open density snapshot " + p.string());
      mu.density = read_checkpoint(in).dist;
    } else {
      throw std::runtime_error("measure file line " + std::to_string(lineno) + ": unknown record '" + kind + "'");
    }
  }
  mu.validate();
  return mu;
}

}  // namespace bn
