#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bn {

enum class GradingKind { uniform, geometric, power };

struct Grading {
  GradingKind kind = GradingKind::power;
  /// Ratio for geometric grading, exponent for power grading; unused for uniform.
  double parameter = 2.0;

  static Grading uniform() { return {GradingKind::uniform, 1.0}; }
  static Grading geometric(double ratio) { return {GradingKind::geometric, ratio}; }
  static Grading power(double exponent) { return {GradingKind::power, exponent}; }

  std::string to_string() const;
  static Grading parse(const std::string& text);
};

/**
 * Energy mesh description.
 *
 * Without `first_node` the nodes follow the closed-form placement for the
 * grading (uniform k/N, power (k/N)^p, geometric (r^k-1)/(r^N-1)). With
 * `first_node` set, x_1 is pinned to that value and the remaining N-1 nodes
 * are spread over [x_1, x_max] with the same grading law.
 *
 * `singular_exponent` a > 0 switches the weights to product integration:
 * on [0, x_1] the profile is taken proportional to x^{-a}, and on every later
 * cell f is x^{-a} times the linear interpolant of x^a f. Profiles
 * x^{-a} g with smooth g then converge at second order. a = 0 is the
 * plain trapezoid rule.
 */
struct GridSpec {
  int node_count = 128;
  double x_max = 20.0;
  Grading grading = Grading::power(2.0);
  std::optional<double> first_node;
  double singular_exponent = 0.0;

  void validate() const;
};

class EnergyGrid {
 public:
  explicit EnergyGrid(const GridSpec& spec);
  /// Adopts explicit nodes and weights (e.g. read back from a snapshot file).
  EnergyGrid(const GridSpec& spec, std::vector<double> nodes, std::vector<double> weights);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }
  double x_max() const { return nodes_.back(); }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Index i with x_i <= x < x_{i+1}; -1 below x_1, size()-1 at or above x_max.
  std::ptrdiff_t locate(double x) const;

  /**
   * Integral over [lo, hi] of the function whose node values are `values`,
   * using the same reconstruction the weights integrate exactly (see
   * GridSpec::singular_exponent).
   * Cells straddling lo or hi are split.
   */
  double integrate_range(std::span<const double> values, double lo, double hi) const;

 private:
  GridSpec spec_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const EnergyGrid>;

struct CellMoments {
  double zeroth = 0.0;  // \int_lo^hi x^{-a} dx
  double first = 0.0;   // \int_lo^hi x^{-a} (x - x_l) dx
};

CellMoments singular_cell_moments(double lo, double hi, double xl, double a);

GridPtr build_grid(const GridSpec& spec);

/// Samples of f on a grid, with the time they refer to.
struct Distribution {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;
  long step = 0;

  Distribution() = default;
  Distribution(GridPtr g, std::vector<double> v, double t = 0.0, long s = 0);

  static Distribution zeros(GridPtr g, double t = 0.0);

  std::size_t size() const { return values.size(); }
  /// Throws if any value is negative or non-finite, or the sizes disagree.
  void validate() const;
};

/// Sum of w_i x_i^p f_i, the quadrature of the p-th moment.
double integrate(const Distribution& dist, double moment_power);

inline double mass(const Distribution& dist) { return integrate(dist, 0.5); }
inline double energy(const Distribution& dist) { return integrate(dist, 1.5); }

/**
 * Piecewise-linear value of f at an arbitrary energy. Constant extension
 * below x_1, zero above x_max.
 */
double sample(const Distribution& dist, double x);

/// Same rule as `sample`, on bare arrays. Used by the collision hot loop.
double sample_nodes(std::span<const double> nodes, std::span<const double> values, double x);

}  // namespace bn
