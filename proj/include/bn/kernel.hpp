#pragma once

namespace bn::kernel {

/// Energies of a binary collision, w = y + z - x.
struct EnergyQuad {
  double x, w, y, z;

  static EnergyQuad from_xyz(double x, double y, double z);
  bool valid() const;
};

/// min(sqrt x, sqrt w, sqrt y, sqrt z) / sqrt x. Requires x > 0.
double w_kernel(double x, double w, double y, double z);

/// min(sqrt x, sqrt w, sqrt y, sqrt z); symmetric in all four arguments.
double phi_kernel(double w, double x, double y, double z);

/**
 * Auxiliary weight of the loss-rate decomposition:
 * (w/x)^{3/2}/3 for w <= x, 1/3 + w/x - sqrt(w/x) for w >= x.
 */
double g_aux(double x, double w);

}  // namespace bn::kernel
