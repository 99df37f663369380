#include "bn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace bn {

std::string Grading::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case GradingKind::uniform: return "uniform";
    case GradingKind::geometric: os << "geometric(" << parameter << ")"; break;
    case GradingKind::power: os << "power(" << parameter << ")"; break;
  }
  return os.str();
}

Grading Grading::parse(const std::string& text) {
  if (text == "uniform") return uniform();
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("grading: expected uniform, geometric(r) or power(p), got '" + text + "'");
  std::string name = text.substr(0, open);
  double value = std::stod(text.substr(open + 1, close - open - 1));
  if (name == "geometric") return geometric(value);
  if (name == "power") return power(value);
  throw std::invalid_argument("grading: unknown kind '" + name + "'");
}

void GridSpec::validate() const {
  if (node_count < 8) throw std::invalid_argument("grid: node_count must be >= 8");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw std::invalid_argument("grid: x_max must be positive");
  if (first_node) {
    if (!(*first_node > 0.0)) throw std::invalid_argument("grid: first_node must be positive");
    if (*first_node >= x_max) throw std::invalid_argument("grid: first_node must be below x_max");
  }
  if (grading.kind != GradingKind::uniform) {
    if (!std::isfinite(grading.parameter) || !(grading.parameter > 1.0))
      throw std::invalid_argument("grid: grading parameter must be finite and > 1");
  }
  if (!(singular_exponent >= 0.0 && singular_exponent < 1.0))
    throw std::invalid_argument("grid: singular_exponent must lie in [0, 1)");
}

namespace {

// Grading law mapped onto s in [0, 1] with law(0) = 0, law(1) = 1.
double grading_law(const Grading& g, double s) {
  switch (g.kind) {
    case GradingKind::uniform: return s;
    case GradingKind::power: return std::pow(s, g.parameter);
    case GradingKind::geometric: break;
  }
  return 0.0;
}

std::vector<double> place_nodes(const GridSpec& spec) {
  const int n = spec.node_count;
  std::vector<double> x(n);
  if (!spec.first_node) {
    if (spec.grading.kind == GradingKind::geometric) {
      const double r = spec.grading.parameter;
      const double denom = std::pow(r, n) - 1.0;
      for (int k = 1; k <= n; ++k) x[k - 1] = spec.x_max * ((std::pow(r, k) - 1.0) / denom);
    } else {
      for (int k = 1; k <= n; ++k) x[k - 1] = spec.x_max * grading_law(spec.grading, double(k) / n);
    }
  } else {
    const double x1 = *spec.first_node;
    const double span = spec.x_max - x1;
    if (spec.grading.kind == GradingKind::geometric) {
      const double r = spec.grading.parameter;
      const double denom = std::pow(r, n - 1) - 1.0;
      for (int k = 1; k <= n; ++k) x[k - 1] = x1 + span * ((std::pow(r, k - 1) - 1.0) / denom);
    } else {
      for (int k = 1; k <= n; ++k) x[k - 1] = x1 + span * grading_law(spec.grading, double(k - 1) / (n - 1));
    }
  }
  x.back() = spec.x_max;
  for (int k = 1; k < n; ++k) {
    if (!(x[k] > x[k - 1])) throw std::invalid_argument("grid: nodes are not strictly increasing (grading too extreme)");
  }
  if (!(x.front() > 0.0)) throw std::invalid_argument("grid: first node underflows to zero");
  return x;
}

}  // namespace

CellMoments singular_cell_moments(double lo, double hi, double xl, double a) {
  CellMoments m;
  if (!(hi > lo)) return m;
  if (lo <= 0.0 || (hi - lo) > 1e-2 * lo) {
    const double e0 = 1.0 - a, e1 = 2.0 - a;
    m.zeroth = (std::pow(hi, e0) - std::pow(lo, e0)) / e0;
    m.first = (std::pow(hi, e1) - std::pow(lo, e1)) / e1 - xl * m.zeroth;
  } else {
    // thin cell far from the origin: the closed form cancels, Gauss-Legendre does not
    auto f0 = [a](double x) { return std::pow(x, -a); };
    auto f1 = [a, xl](double x) { return std::pow(x, -a) * (x - xl); };
    m.zeroth = boost::math::quadrature::gauss<double, 7>::integrate(f0, lo, hi);
    m.first = boost::math::quadrature::gauss<double, 7>::integrate(f1, lo, hi);
  }
  return m;
}

EnergyGrid::EnergyGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  nodes_ = place_nodes(spec_);
  const std::size_t n = nodes_.size();
  const double a = spec_.singular_exponent;
  weights_.assign(n, 0.0);
  weights_[0] = nodes_[0] / (1.0 - a);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xl = nodes_[i], xr = nodes_[i + 1];
    if (a == 0.0) {
      const double half = 0.5 * (xr - xl);
      weights_[i] += half;
      weights_[i + 1] += half;
    } else {
      const CellMoments m = singular_cell_moments(xl, xr, xl, a);
      const double right = m.first / (xr - xl);
      weights_[i] += std::pow(xl, a) * (m.zeroth - right);
      weights_[i + 1] += std::pow(xr, a) * right;
    }
  }
}

EnergyGrid::EnergyGrid(const GridSpec& spec, std::vector<double> nodes, std::vector<double> weights)
    : spec_(spec), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() < 2 || nodes_.size() != weights_.size()) throw std::invalid_argument("grid: need matching node and weight arrays");
  if (!(nodes_[0] > 0.0)) throw std::invalid_argument("grid: first node must be positive");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!std::isfinite(nodes_[k]) || !std::isfinite(weights_[k]) || !(weights_[k] > 0.0))
      throw std::invalid_argument("grid: nodes and weights must be finite, weights positive");
    if (k > 0 && !(nodes_[k] > nodes_[k - 1])) throw std::invalid_argument("grid: nodes are not strictly increasing");
  }
  spec_.node_count = static_cast<int>(nodes_.size());
  spec_.x_max = nodes_.back();
}

std::ptrdiff_t EnergyGrid::locate(double x) const {
  if (x < nodes_.front()) return -1;
  if (x >= nodes_.back()) return static_cast<std::ptrdiff_t>(nodes_.size()) - 1;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  return static_cast<std::ptrdiff_t>(it - nodes_.begin()) - 1;
}

double EnergyGrid::integrate_range(std::span<const double> values, double lo, double hi) const {
  if (values.size() != nodes_.size()) throw std::invalid_argument("integrate_range: size mismatch");
  lo = std::max(lo, 0.0);
  hi = std::min(hi, nodes_.back());
  if (!(hi > lo)) return 0.0;

  double total = 0.0;
  const double x1 = nodes_[0];
  if (lo < x1) {
    // h(x) = h_1 (x/x_1)^{-a} on [0, x_1]
    const double a = spec_.singular_exponent;
    const double b = std::min(hi, x1);
    const double e = 1.0 - a;
    total += values[0] * x1 * (std::pow(b / x1, e) - std::pow(lo / x1, e)) / e;
  }
  const double a = spec_.singular_exponent;
  std::size_t first = lo <= x1 ? 0 : static_cast<std::size_t>(locate(lo));
  for (std::size_t i = first; i + 1 < nodes_.size(); ++i) {
    const double xl = nodes_[i], xr = nodes_[i + 1];
    if (xl >= hi) break;
    const double lo_c = std::max(lo, xl), hi_c = std::min(hi, xr);
    if (!(hi_c > lo_c)) continue;
    if (a == 0.0) {
      const double slope = (values[i + 1] - values[i]) / (xr - xl);
      const double ha = values[i] + slope * (lo_c - xl);
      const double hb = values[i] + slope * (hi_c - xl);
      total += 0.5 * (hi_c - lo_c) * (ha + hb);
    } else {
      // x^{-a} times the linear interpolant of x^a h
      const double gl = std::pow(xl, a) * values[i], gr = std::pow(xr, a) * values[i + 1];
      const CellMoments m = singular_cell_moments(lo_c, hi_c, xl, a);
      total += gl * m.zeroth + (gr - gl) / (xr - xl) * m.first;
    }
  }
  return total;
}

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const EnergyGrid>(spec); }

Distribution::Distribution(GridPtr g, std::vector<double> v, double t, long s)
    : grid(std::move(g)), values(std::move(v)), time(t), step(s) {}

Distribution Distribution::zeros(GridPtr g, double t) {
  std::vector<double> v(g->size(), 0.0);
  return Distribution(std::move(g), std::move(v), t);
}

void Distribution::validate() const {
  if (!grid) throw std::invalid_argument("distribution: missing grid");
  if (values.size() != grid->size()) throw std::invalid_argument("distribution: value count does not match grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw std::invalid_argument("distribution: value at node " + std::to_string(i) + " is negative or non-finite");
    }
  }
  if (!(time >= 0.0)) throw std::invalid_argument("distribution: negative time");
}

double integrate(const Distribution& dist, double moment_power) {
  if (!std::isfinite(moment_power) || moment_power < 0.0) throw std::invalid_argument("integrate: moment power must be finite and >= 0");
  const auto x = dist.grid->nodes();
  const auto w = dist.grid->weights();
  double total = 0.0;
  if (moment_power == 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * dist.values[i];
  } else if (moment_power == 0.5) {
    for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * std::sqrt(x[i]) * dist.values[i];
  } else if (moment_power == 1.5) {
    for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * (x[i] * std::sqrt(x[i])) * dist.values[i];
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * std::pow(x[i], moment_power) * dist.values[i];
  }
  return total;
}

double sample_nodes(std::span<const double> nodes, std::span<const double> values, double x) {
  if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("sample: energy must be finite and >= 0");
  const std::size_t n = nodes.size();
  if (x < nodes[0]) return values[0];
  if (x > nodes[n - 1]) return 0.0;
  if (x == nodes[n - 1]) return values[n - 1];
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t r = static_cast<std::size_t>(it - nodes.begin());
  const std::size_t l = r - 1;
  if (x == nodes[l]) return values[l];
  const double t = (x - nodes[l]) / (nodes[r] - nodes[l]);
  return values[l] + t * (values[r] - values[l]);
}

double sample(const Distribution& dist, double x) { return sample_nodes(dist.grid->nodes(), dist.values, x); }

}  // namespace bn
