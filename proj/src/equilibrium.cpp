#include "bn/equilibrium.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace bn {

void BEParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("BEParams: alpha must be finite and >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("BEParams: beta must be positive");
  if (!(m0 >= 0.0)) throw std::invalid_argument("BEParams: m0 must be >= 0");
  if (alpha * m0 != 0.0) throw std::invalid_argument("BEParams: alpha * m0 must vanish");
}

Distribution be_distribution(const BEParams& params, GridPtr grid) {
  params.validate();
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = params.beta * grid->node(i) + params.alpha;
    const double d = std::expm1(u);
    const double f = 1.0 / d;
    if (!(d > 0.0) || !std::isfinite(f)) {
      std::ostringstream os;
      os << "be_distribution: e^{beta x + alpha} - 1 underflows at x = " << grid->node(i)
         << "; raise grid.first_node";
      throw std::invalid_argument(os.str());
    }
    v[i] = f;
  }
  return Distribution(std::move(grid), std::move(v));
}

namespace {

// e^{alpha} \int_0^\infty 2 v^n / (e^{v^2 + alpha} - 1) dv, for n = 2 (mass) and n = 4 (energy).
// With x = v^2 / beta: mass = beta^{-3/2} e^{-alpha} K_2, energy = beta^{-5/2} e^{-alpha} K_4.
double scaled_integral(int n, double alpha) {
  auto integrand = [n, alpha](double v) {
    const double u = v * v + alpha;
    if (u == 0.0) return n == 2 ? 2.0 : 0.0;
    return 2.0 * std::pow(v, n) * std::exp(-v * v) / -std::expm1(-u);
  };
  double err = 0.0;
  // e^{-v^2} is below 1e-43 past v = 10
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 10.0, 15, 1e-15, &err);
}

// log(mass / energy^{3/5}); independent of beta and strictly decreasing in alpha.
double log_ratio(double alpha) {
  return -0.4 * alpha + std::log(scaled_integral(2, alpha)) - 0.6 * std::log(scaled_integral(4, alpha));
}

void check_ratio_monotone() {
  static const bool ok = [] {
    double prev = log_ratio(0.0);
    for (int k = 1; k <= 64; ++k) {
      const double a = 0.05 * k * k;
      const double cur = log_ratio(a);
      if (!(cur < prev)) return false;
      prev = cur;
    }
    return true;
  }();
  if (!ok) throw std::logic_error("fit_equilibrium: mass/energy^{3/5} is not monotone in alpha");
}

double beta_for_energy(double alpha, double energy) {
  // energy = beta^{-5/2} e^{-alpha} K_4(alpha)
  return std::exp(0.4 * (-alpha + std::log(scaled_integral(4, alpha)) - std::log(energy)));
}

}  // namespace

BEMoments be_moments(double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta > 0.0)) throw std::invalid_argument("be_moments: need alpha >= 0 and beta > 0");
  const double damp = std::exp(-alpha);
  BEMoments m;
  m.mass = damp * scaled_integral(2, alpha) / (beta * std::sqrt(beta));
  m.energy = damp * scaled_integral(4, alpha) / (beta * beta * std::sqrt(beta));
  return m;
}

double critical_mass(double energy) {
  if (!(energy > 0.0)) throw std::invalid_argument("critical_mass: energy must be positive");
  return be_moments(0.0, beta_for_energy(0.0, energy)).mass;
}

BEParams fit_equilibrium(double mass, double energy) {
  if (!(mass > 0.0) || !(energy > 0.0)) throw std::invalid_argument("fit_equilibrium: mass and energy must be positive");
  check_ratio_monotone();

  const double target = std::log(mass) - 0.6 * std::log(energy);
  BEParams p;
  if (target >= log_ratio(0.0)) {
    p.alpha = 0.0;
    p.beta = beta_for_energy(0.0, energy);
    p.m0 = std::max(0.0, mass - be_moments(0.0, p.beta).mass);
    p.supercritical = p.m0 > 0.0;
    return p;
  }

  double lo = 0.0, hi = 1.0;
  while (log_ratio(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("fit_equilibrium: cannot bracket alpha (mass too small?)");
  }
  const auto f = [&](double a) { return log_ratio(a) - target; };
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t max_iter = 200;
  std::tie(lo, hi) = boost::math::tools::bisect(f, lo, hi, tol, max_iter);
  p.alpha = 0.5 * (lo + hi);
  p.beta = beta_for_energy(p.alpha, energy);
  p.m0 = 0.0;
  p.supercritical = false;
  return p;
}

}  // namespace bn
