#include "bn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bn::kernel {

EnergyQuad EnergyQuad::from_xyz(double x, double y, double z) { return {x, y + z - x, y, z}; }

bool EnergyQuad::valid() const {
  return std::isfinite(x) && std::isfinite(w) && std::isfinite(y) && std::isfinite(z) && x >= 0.0 && w >= 0.0 &&
         y >= 0.0 && z >= 0.0;
}

double w_kernel(double x, double w, double y, double z) {
  if (!(x > 0.0)) throw std::invalid_argument("w_kernel: x must be positive");
  if (w < 0.0 || y < 0.0 || z < 0.0) throw std::invalid_argument("w_kernel: negative energy");
  const double sx = std::sqrt(x);
  const double m = std::min({sx, std::sqrt(w), std::sqrt(y), std::sqrt(z)});
  return m / sx;
}

double phi_kernel(double w, double x, double y, double z) {
  if (w < 0.0 || x < 0.0 || y < 0.0 || z < 0.0) throw std::invalid_argument("phi_kernel: negative energy");
  return std::sqrt(std::min({w, x, y, z}));
}

double g_aux(double x, double w) {
  if (!(x > 0.0)) throw std::invalid_argument("g_aux: x must be positive");
  if (w < 0.0) throw std::invalid_argument("g_aux: w must be nonnegative");
  const double r = w / x;
  if (r <= 1.0) return r * std::sqrt(r) / 3.0;
  return 1.0 / 3.0 + r - std::sqrt(r);
}

}  // namespace bn::kernel
