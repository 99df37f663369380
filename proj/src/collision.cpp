#include "bn/collision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace bn {

namespace {

unsigned default_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BN_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

unsigned& thread_setting() {
  static unsigned n = default_threads();
  return n;
}

// Runs body(i) for i in [0, n) over contiguous blocks. Each index writes only
// its own outputs, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned threads = std::min<std::size_t>(collision_threads(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  // Target nodes near x_max carry the most (y, z) pairs; interleave so blocks balance.
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

void check_finite(const RateParts& p) {
  for (std::size_t i = 0; i < p.quad_loss.size(); ++i) {
    if (!std::isfinite(p.quad_loss[i]) || !std::isfinite(p.lin_loss[i]) || !std::isfinite(p.cubic_gain[i]) ||
        !std::isfinite(p.quad_gain[i])) {
      throw NumericFault("collision rates overflow at node " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
    }
  }
}

}  // namespace

std::string to_string(Quadrature q) { return q == Quadrature::nodal ? "nodal" : "blended"; }

Quadrature quadrature_from_string(const std::string& s) {
  if (s == "nodal") return Quadrature::nodal;
  if (s == "blended") return Quadrature::blended;
  throw std::invalid_argument("unknown quadrature '" + s + "' (expected nodal or blended)");
}

unsigned collision_threads() { return thread_setting(); }
void set_collision_threads(unsigned n) { thread_setting() = std::max(1u, n); }

RateParts rate_parts(const Distribution& dist, Quadrature quad) {
  const bool blend = quad == Quadrature::blended;
  dist.validate();
  const auto x = dist.grid->nodes();
  const auto om = dist.grid->weights();
  const std::vector<double>& f = dist.values;
  const std::size_t n = x.size();

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = std::sqrt(x[i]);

  RateParts out;
  out.quad_loss.assign(n, 0.0);
  out.lin_loss.assign(n, 0.0);
  out.cubic_gain.assign(n, 0.0);
  out.quad_gain.assign(n, 0.0);

  const double x_last = x[n - 1];

  parallel_for(n, [&](std::size_t i) {
    const double xi = x[i];
    const double sxi = sq[i];
    const double fi = f[i];
    double a2 = 0.0, a1 = 0.0, c3 = 0.0, c2 = 0.0;

    for (std::size_t j = 0; j < n; ++j) {
      const double yj = x[j];
      const double fj = f[j];
      const double syj = sq[j];

      // first k >= j with (y_j + z_k) - x_i >= 0
      std::size_t k = static_cast<std::size_t>(std::lower_bound(x.begin() + j, x.end(), xi - yj) - x.begin());
      while (k > j && (yj + x[k - 1]) - xi >= 0.0) --k;
      while (k < n && (yj + x[k]) - xi < 0.0) ++k;
      if (k == n) continue;

      // p tracks the cell holding w; w grows with k
      double w0 = (yj + x[k]) - xi;
      std::size_t p = w0 < x[0] ? 0 : static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), w0) - x.begin()) - 1;

      double s_a2 = 0.0, s_a1 = 0.0, s_c3 = 0.0, s_c2 = 0.0;
      for (; k < n; ++k) {
        const double zk = x[k];
        const double fk = f[k];
        const double w = (yj + zk) - xi;

        double fw;
        if (w < x[0]) {
          fw = f[0];
        } else if (w > x_last) {
          fw = 0.0;
        } else {
          while (p + 1 < n && x[p + 1] <= w) ++p;
          if (p + 1 == n || w == x[p]) {
            fw = f[p];
          } else {
            const double t = (w - x[p]) / (x[p + 1] - x[p]);
            fw = f[p] + t * (f[p + 1] - f[p]);
          }
        }

        double phi = std::min(std::min(sxi, std::sqrt(w)), std::min(syj, sq[k]));
        if (blend) {
          const double w2 = w * w;
          phi *= w2 / (w2 + (yj * yj + zk * zk));
        }
        const double c = (k == j ? 1.0 : 2.0) * om[k] * phi;
        const double fjk = fj * fk;
        s_a2 += c * (fw * (fj + fk));
        s_a1 += c * fw;
        s_c3 += c * (fjk * (fi + fw));
        s_c2 += c * fjk;
      }
      a2 += om[j] * s_a2;
      a1 += om[j] * s_a1;
      c3 += om[j] * s_c3;
      c2 += om[j] * s_c2;
    }

    if (blend) {
      // y-interpolated share with (w, z) on nodes; the z-interpolated share
      // is its mirror image under y <-> z, hence the factor 2.
      for (std::size_t b = 0; b < n; ++b) {
        const double wb = x[b];
        const double fb = f[b];
        const double swb = sq[b];
        const double top = xi + wb;
        // z_k <= x_i + w_b keeps y >= 0; z_k >= x_i + w_b - x_max keeps y <= x_max
        std::size_t k = 0;
        if (top - x_last > 0.0) k = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), top - x_last) - x.begin());
        while (k > 0 && top - x[k - 1] <= x_last) --k;
        while (k < n && top - x[k] > x_last) ++k;
        if (k == n || top - x[k] < 0.0) continue;

        double y0 = top - x[k];
        std::size_t p = y0 < x[0] ? 0 : static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), y0) - x.begin()) - 1;
        if (p >= n) p = n - 1;

        double s_a2 = 0.0, s_a1 = 0.0, s_c3 = 0.0, s_c2 = 0.0;
        for (; k < n; ++k) {
          const double zk = x[k];
          const double y = top - zk;
          if (y < 0.0) break;
          // y falls as k grows
          double fy;
          if (y < x[0]) {
            fy = f[0];
          } else {
            while (p > 0 && x[p] > y) --p;
            if (p + 1 == n || y == x[p]) {
              fy = f[p];
            } else {
              const double t = (y - x[p]) / (x[p + 1] - x[p]);
              fy = f[p] + t * (f[p + 1] - f[p]);
            }
          }
          const double y2 = y * y;
          const double chi = y2 / (y2 + (wb * wb + zk * zk));
          const double phi = std::min(std::min(sxi, std::sqrt(y)), std::min(swb, sq[k])) * chi;
          const double c = 2.0 * om[k] * phi;
          const double fyk = fy * f[k];
          s_a2 += c * (fb * (fy + f[k]));
          s_a1 += c * fb;
          s_c3 += c * (fyk * (fi + fb));
          s_c2 += c * fyk;
        }
        a2 += om[b] * s_a2;
        a1 += om[b] * s_a1;
        c3 += om[b] * s_c3;
        c2 += om[b] * s_c2;
      }
    }
    out.quad_loss[i] = a2 / sxi;
    out.lin_loss[i] = a1 / sxi;
    out.cubic_gain[i] = c3 / sxi;
    out.quad_gain[i] = c2 / sxi;
  });

  check_finite(out);
  return out;
}

CollisionRates collision_rates(const Distribution& dist, Quadrature quad) {
  RateParts p = rate_parts(dist, quad);
  CollisionRates r;
  const std::size_t n = p.quad_loss.size();
  r.loss.resize(n);
  r.gain.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.loss[i] = p.quad_loss[i] + p.lin_loss[i];
    r.gain[i] = p.cubic_gain[i] + p.quad_gain[i];
  }
  r.source_time = dist.time;
  return r;
}

std::vector<double> loss_rate(const Distribution& dist, Quadrature quad) { return collision_rates(dist, quad).loss; }
std::vector<double> gain_rate(const Distribution& dist, Quadrature quad) { return collision_rates(dist, quad).gain; }

std::vector<double> collision_rhs(const Distribution& dist, const CollisionRates& rates) {
  std::vector<double> q(dist.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = rates.gain[i] - dist.values[i] * rates.loss[i];
  return q;
}

std::vector<double> collision_rhs(const Distribution& dist, Quadrature quad) {
  return collision_rhs(dist, collision_rates(dist, quad));
}

WeakAction weak_action_parts(const Distribution& dist, const std::function<double(double)>& phi) {
  dist.validate();
  const auto x = dist.grid->nodes();
  const auto om = dist.grid->weights();
  const std::vector<double>& f = dist.values;
  const std::size_t n = x.size();

  std::vector<double> phi_node(n);
  for (std::size_t i = 0; i < n; ++i) phi_node[i] = phi(x[i]);

  WeakAction out;
  // b indexes w; (a, c) index the unordered pair (x, y).
  for (std::size_t b = 0; b < n; ++b) {
    const double w = x[b];
    const double fw = f[b];
    const double phi_w = phi_node[b];
    double cubic = 0.0, quad = 0.0, mag = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (f[a] == 0.0) continue;
      for (std::size_t c = a; c < n; ++c) {
        const double z = (x[a] + x[c]) - w;
        if (z < 0.0) continue;
        const double fac = f[a] * f[c];
        if (fac == 0.0) continue;
        const double kern = std::sqrt(std::min(std::min(w, z), std::min(x[a], x[c])));
        const double base = phi_w + phi(z);
        const double wt = om[a] * om[c] * kern * fac;
        double bracket, abs_bracket;
        if (a == c) {
          bracket = base - 2.0 * phi_node[a];
          abs_bracket = std::abs(bracket);
        } else {
          const double b1 = base - 2.0 * phi_node[a];
          const double b2 = base - 2.0 * phi_node[c];
          bracket = b1 + b2;
          abs_bracket = std::abs(b1) + std::abs(b2);
        }
        cubic += wt * fw * bracket;
        quad += wt * 0.5 * bracket;
        mag += wt * (fw + 0.5) * abs_bracket;
      }
    }
    out.cubic += om[b] * cubic;
    out.quadratic += om[b] * quad;
    out.magnitude += om[b] * mag;
  }
  return out;
}

double weak_action(const Distribution& dist, const std::function<double(double)>& phi) {
  return weak_action_parts(dist, phi).total();
}

namespace {

struct Moments3 {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;  // weights x^{1/2}, x^{3/2}, x^{5/2}
};

Moments3 remap_moments(const Distribution& d, const std::vector<char>& active) {
  const auto x = d.grid->nodes();
  const auto w = d.grid->weights();
  Moments3 m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!active[i]) continue;
    const double s = std::sqrt(x[i]);
    m.m0 += w[i] * s * d.values[i];
    m.m1 += w[i] * (x[i] * s) * d.values[i];
    m.m2 += w[i] * (x[i] * x[i] * s) * d.values[i];
  }
  return m;
}

bool solve_remap(const Moments3& m, double tm, double te, double& a, double& b) {
  const double det = m.m0 * m.m2 - m.m1 * m.m1;
  const double scale = m.m0 * m.m2;
  if (!(std::abs(det) > 1e-13 * scale) || !std::isfinite(det)) return false;
  a = (tm * m.m2 - te * m.m1) / det;
  b = (m.m0 * te - m.m1 * tm) / det;
  return std::isfinite(a) && std::isfinite(b);
}

}  // namespace

RemapResult conservative_remap(const Distribution& dist, double target_mass, double target_energy) {
  dist.validate();
  if (!(target_mass > 0.0) || !(target_energy > 0.0)) throw std::invalid_argument("conservative_remap: targets must be positive");
  const auto x = dist.grid->nodes();
  const std::size_t n = x.size();
  std::vector<char> active(n, 1);

  RemapResult res;
  double a = 0.0, b = 0.0;
  if (!solve_remap(remap_moments(dist, active), target_mass, target_energy, a, b)) return res;

  bool clipped = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist.values[i] > 0.0 && a + b * x[i] < 0.0) {
      active[i] = 0;
      clipped = true;
    }
  }
  if (clipped) {
    if (!solve_remap(remap_moments(dist, active), target_mass, target_energy, a, b)) return res;
  }

  Distribution out = dist;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = active[i] ? a + b * x[i] : 0.0;
    out.values[i] = s > 0.0 ? dist.values[i] * s : 0.0;
  }
  res.dist = std::move(out);
  res.scale = a;
  res.slope = b;
  res.clipped = clipped;
  return res;
}

}  // namespace bn
