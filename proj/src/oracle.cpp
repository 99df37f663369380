#include "bn/oracle.hpp"

#include <stdexcept>

#include "bn/kernel.hpp"

namespace bn {

namespace {

// f at energy w: f_1 below x_1, zero past x_max, linear in between.
double interp(const std::vector<double>& x, const std::vector<double>& f, double w) {
  const std::size_t n = x.size();
  if (w < x[0]) return f[0];
  if (w > x[n - 1]) return 0.0;
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (x[mid] <= w) lo = mid;
    else hi = mid;
  }
  if (w == x[lo]) return f[lo];
  if (w == x[hi]) return f[hi];
  return f[lo] + (w - x[lo]) / (x[hi] - x[lo]) * (f[hi] - f[lo]);
}

}  // namespace

CollisionRates loss_gain_oracle(const Distribution& dist, Quadrature quad) {
  dist.validate();
  const std::size_t n = dist.size();
  if (n > 64) throw std::invalid_argument("loss_gain_oracle: grid too large (N > 64)");
  const std::vector<double> x(dist.grid->nodes().begin(), dist.grid->nodes().end());
  const std::vector<double> om(dist.grid->weights().begin(), dist.grid->weights().end());
  const std::vector<double>& f = dist.values;

  CollisionRates r;
  r.loss.assign(n, 0.0);
  r.gain.assign(n, 0.0);
  r.source_time = dist.time;
  const bool blend = quad == Quadrature::blended;
  auto share = [blend](double v, double p, double q) { return blend ? v * v / (v * v + p * p + q * q) : 1.0; };
  const double top = x[n - 1];

  for (std::size_t i = 0; i < n; ++i) {
    // y_j, z_k on nodes, w interpolated
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const double w = (x[j] + x[k]) - x[i];
        if (w < 0.0) continue;
        const double W = kernel::w_kernel(x[i], w, x[j], x[k]) * share(w, x[j], x[k]);
        const double fw = interp(x, f, w);
        r.loss[i] += om[j] * om[k] * W * fw * (f[j] + f[k] + 1.0);
        r.gain[i] += om[j] * om[k] * W * f[j] * f[k] * (f[i] + fw + 1.0);
      }
    }
    if (!blend) continue;
    // w_b, z_k on nodes, y interpolated
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t k = 0; k < n; ++k) {
        const double y = (x[i] + x[b]) - x[k];
        if (y < 0.0 || y > top) continue;
        const double W = kernel::w_kernel(x[i], x[b], y, x[k]) * share(y, x[b], x[k]);
        const double fy = interp(x, f, y);
        r.loss[i] += om[b] * om[k] * W * f[b] * (fy + f[k] + 1.0);
        r.gain[i] += om[b] * om[k] * W * fy * f[k] * (f[i] + f[b] + 1.0);
      }
    }
    // w_b, y_j on nodes, z interpolated
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t j = 0; j < n; ++j) {
        const double z = (x[i] + x[b]) - x[j];
        if (z < 0.0 || z > top) continue;
        const double W = kernel::w_kernel(x[i], x[b], x[j], z) * share(z, x[b], x[j]);
        const double fz = interp(x, f, z);
        r.loss[i] += om[b] * om[j] * W * f[b] * (f[j] + fz + 1.0);
        r.gain[i] += om[b] * om[j] * W * f[j] * fz * (f[i] + f[b] + 1.0);
      }
    }
  }
  return r;
}

}  // namespace bn
