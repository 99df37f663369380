#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bn/grid.hpp"

namespace bn {

/// Raised when a rate evaluation produces a non-finite value.
class NumericFault : public std::runtime_error {
 public:
  NumericFault(const std::string& what, std::ptrdiff_t node) : std::runtime_error(what), node_(node) {}
  std::ptrdiff_t node() const { return node_; }

 private:
  std::ptrdiff_t node_;
};

struct CollisionRates {
  std::vector<double> loss;  // a_i
  std::vector<double> gain;  // J_i
  double source_time = 0.0;
};

/**
 * Homogeneous pieces of the rates at each node:
 *   a = quad_loss + lin_loss      (degrees 2 and 1 in f)
 *   J = cubic_gain + quad_gain    (degrees 3 and 2 in f)
 */
struct RateParts {
  std::vector<double> quad_loss, lin_loss, cubic_gain, quad_gain;
};

/**
 * How the (y, z) collision integral is discretized.
 *
 * nodal:   y and z on grid nodes, f(w) interpolated at w = y + z - x.
 * blended: the integral is split by a partition of unity
 *          chi_v = v^2 / (w^2 + y^2 + z^2), v in {w, y, z}; each share is
 *          summed with the other two energies on nodes and v interpolated.
 *          The interpolated energy is then the largest of the three wherever
 *          its share matters, so a concentrated profile near x = 0 is never
 *          sampled through a coarse cell. Needed for runs approaching blow-up.
 */
enum class Quadrature { nodal, blended };

std::string to_string(Quadrature q);
Quadrature quadrature_from_string(const std::string& s);

/// Number of worker threads used for rate evaluation (BN_THREADS caps it).
unsigned collision_threads();
void set_collision_threads(unsigned n);

RateParts rate_parts(const Distribution& dist, Quadrature quad = Quadrature::nodal);
CollisionRates collision_rates(const Distribution& dist, Quadrature quad = Quadrature::nodal);

std::vector<double> loss_rate(const Distribution& dist, Quadrature quad = Quadrature::nodal);
std::vector<double> gain_rate(const Distribution& dist, Quadrature quad = Quadrature::nodal);

/// Q_i = J_i - f_i a_i.
std::vector<double> collision_rhs(const Distribution& dist, Quadrature quad = Quadrature::nodal);
std::vector<double> collision_rhs(const Distribution& dist, const CollisionRates& rates);

struct WeakAction {
  double cubic = 0.0;
  double quadratic = 0.0;
  /// Sum of the absolute values of the unpaired contributions.
  double magnitude = 0.0;
  double total() const { return cubic + quadratic; }
};

/**
 * Symmetrized weak form of the collision operator for the density g = sqrt(x) f:
 *
 *   d/dt \int phi g dx = G3[phi] + G2[phi],
 *   G3 = \iiint [phi(w) + phi(z) - 2 phi(x)] Phi(w,x,y,z) f(x) f(w) f(y) dx dw dy,
 *   G2 = 1/2 \iiint [phi(w) + phi(z) - 2 phi(x)] Phi(w,x,y,z) f(x) f(y) dx dw dy,
 *
 * with z = x + y - w >= 0. The (x, y) and (y, x) terms are accumulated as one
 * pair, so brackets antisymmetric under x <-> y cancel before summation.
 * `phi` must be finite on [0, 2 x_max].
 */
WeakAction weak_action_parts(const Distribution& dist, const std::function<double(double)>& phi);
double weak_action(const Distribution& dist, const std::function<double(double)>& phi);

struct RemapResult {
  std::optional<Distribution> dist;  // empty when the 2x2 system is singular
  double scale = 0.0;                // A
  double slope = 0.0;                // B
  bool clipped = false;
};

/**
 * f'_i = f_i (A + B x_i), clipped at zero, with (A, B) chosen so that the
 * mass and energy of f' hit the targets. One re-solve on the unclipped set
 * is attempted if clipping occurs.
 */
RemapResult conservative_remap(const Distribution& dist, double target_mass, double target_energy);

}  // namespace bn
