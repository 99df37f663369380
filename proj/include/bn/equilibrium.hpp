#pragma once

#include "bn/grid.hpp"

namespace bn {

/// Bose-Einstein equilibrium m0 delta(x) + sqrt(x)/(e^{beta x + alpha} - 1), with alpha m0 = 0.
struct BEParams {
  double alpha = 0.0;
  double beta = 1.0;
  double m0 = 0.0;
  bool supercritical = false;

  void validate() const;
};

struct BEMoments {
  double mass = 0.0;
  double energy = 0.0;
};

/// f_i = 1/(e^{beta x_i + alpha} - 1). The condensate is not placed on the grid.
Distribution be_distribution(const BEParams& params, GridPtr grid);

/// Mass and energy of the regular part, by adaptive quadrature.
BEMoments be_moments(double alpha, double beta);

/// Mass of the alpha = 0 equilibrium carrying the given energy.
double critical_mass(double energy);

/**
 * Inverts (mass, energy) to equilibrium parameters. The scale-free ratio
 * mass / energy^{3/5} fixes alpha; beta follows from the energy. Above the
 * critical ratio alpha = 0 and the excess mass becomes the condensate m0.
 */
BEParams fit_equilibrium(double mass, double energy);

}  // namespace bn
