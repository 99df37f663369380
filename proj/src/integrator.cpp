#include "bn/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bn {

void StepControls::validate() const {
  if (!(dt_init > 0.0) || !(dt_max > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("step controls: dt_init, dt_max and t_end must be positive");
  if (!(cfl_loss > 0.0 && cfl_loss <= 1.0)) throw std::invalid_argument("step controls: cfl_loss must lie in (0, 1]");
  if (!(rel_change_cap > 0.0)) throw std::invalid_argument("step controls: rel_change_cap must be positive");
  if (!(rel_change_floor > 0.0 && rel_change_floor < 1.0))
    throw std::invalid_argument("step controls: rel_change_floor must lie in (0, 1)");
  if (!(blowup_threshold > 1.0)) throw std::invalid_argument("step controls: blowup_threshold must exceed 1");
}

std::string to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd_midpoint"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "etd1") return Scheme::etd1;
  if (s == "etd_midpoint") return Scheme::etd_midpoint;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected etd1 or etd_midpoint)");
}

Distribution exponential_update(const Distribution& dist, const CollisionRates& rates, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_exponential: dt must be positive");
  Distribution out = dist;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double a = rates.loss[i];
    const double J = rates.gain[i];
    const double ad = a * dt;
    const double decay = std::exp(-ad);
    const double duhamel = ad < 1e-8 ? J * dt : J * (-std::expm1(-ad)) / a;
    out.values[i] = dist.values[i] * decay + duhamel;
    if (!std::isfinite(out.values[i]))
      throw NumericFault("exponential update produced a non-finite value at node " + std::to_string(i),
                         static_cast<std::ptrdiff_t>(i));
  }
  out.time = dist.time + dt;
  out.step = dist.step + 1;
  return out;
}

Distribution step_exponential(const Distribution& dist, const CollisionRates& start_rates, double dt, Scheme scheme,
                              Quadrature quad) {
  if (scheme == Scheme::etd1) return exponential_update(dist, start_rates, dt);
  const Distribution half = exponential_update(dist, start_rates, 0.5 * dt);
  const CollisionRates mid = collision_rates(half, quad);
  return exponential_update(dist, mid, dt);
}

Distribution step_exponential(const Distribution& dist, double dt, Scheme scheme, Quadrature quad) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_exponential: dt must be positive");
  return step_exponential(dist, collision_rates(dist, quad), dt, scheme, quad);
}

DtChoice choose_dt(const Distribution& dist, const CollisionRates& rates, const StepControls& c, double dt_prev) {
  double dt = std::min(c.dt_max, 1.5 * dt_prev);

  double a_max = 0.0, f_max = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    a_max = std::max(a_max, rates.loss[i]);
    f_max = std::max(f_max, dist.values[i]);
  }
  if (a_max > 0.0) dt = std::min(dt, c.cfl_loss / a_max);

  const double floor = c.rel_change_floor * f_max;
  double change_rate = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double denom = std::max(dist.values[i], floor);
    if (denom > 0.0) {
      const double q = rates.gain[i] - dist.values[i] * rates.loss[i];
      change_rate = std::max(change_rate, std::abs(q) / denom);
    }
  }
  if (change_rate > 0.0) dt = std::min(dt, c.rel_change_cap / change_rate);

  DtChoice out;
  out.dt = dt;
  out.underflow = !(dt >= 1e-14 * c.t_end);
  return out;
}

RunResult run(const Distribution& initial, const StepControls& controls, const RunOptions& options) {
  initial.validate();
  controls.validate();
  if (options.snapshot_stride < 1) throw std::invalid_argument("run: snapshot_stride must be >= 1");

  RunResult result;
  Trajectory& traj = result.trajectory;
  traj.delta = options.diagnostics.delta;

  RunState state;
  if (options.resume) {
    state = *options.resume;
  } else {
    // first step is capped at dt_init
    state.dt_prev = controls.dt_init / 1.5;
    state.target_mass = mass(initial);
    state.target_energy = energy(initial);
    state.supxf_initial = sup_xf(initial);
  }
  const bool remap = options.remap && state.target_mass > 0.0 && state.target_energy > 0.0;

  Distribution f = initial;
  traj.records.push_back(make_record(f, options.diagnostics, 0.0));
  traj.snapshots.push_back(f);
  bool last_snapshotted = true;
  long steps = 0;

  auto finish = [&](StopReason why) {
    traj.stop_reason = why;
    if (!last_snapshotted) traj.snapshots.push_back(f);
    result.state = state;
    return result;
  };

  if (f.time >= controls.t_end) return finish(StopReason::reached_t_end);

  try {
    for (;;) {
      const CollisionRates rates = collision_rates(f, options.quadrature);
      const DtChoice choice = choose_dt(f, rates, controls, state.dt_prev);
      if (choice.underflow) return finish(StopReason::step_underflow);

      double dt = choice.dt;
      bool final_step = false;
      if (f.time + dt >= controls.t_end) {
        dt = controls.t_end - f.time;
        final_step = true;
      }

      Distribution next = step_exponential(f, rates, dt, options.scheme, options.quadrature);
      if (remap) {
        RemapResult rm = conservative_remap(next, state.target_mass, state.target_energy);
        if (rm.dist) next = std::move(*rm.dist);
        else ++result.remap_refusals;
      }
      next.time = final_step ? controls.t_end : f.time + dt;
      state.dt_prev = dt;
      f = std::move(next);
      ++steps;

      traj.records.push_back(make_record(f, options.diagnostics, dt));
      last_snapshotted = steps % options.snapshot_stride == 0;
      if (last_snapshotted) traj.snapshots.push_back(f);

      if (state.supxf_initial > 0.0 && traj.records.back().supxf >= controls.blowup_threshold * state.supxf_initial)
        return finish(StopReason::blowup_threshold);
      if (final_step) return finish(StopReason::reached_t_end);
    }
  } catch (const NumericFault& e) {
    traj.fault_message = e.what();
    return finish(StopReason::numeric_fault);
  }
}

PicardResult picard_mild(const Distribution& initial, double horizon, int time_levels, int max_iters, double tol) {
  initial.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("picard_mild: horizon must be positive");
  if (time_levels < 1 || max_iters < 1) throw std::invalid_argument("picard_mild: need time_levels >= 1 and max_iters >= 1");

  const int M = time_levels;
  const double h = horizon / M;
  const std::size_t n = initial.size();

  PicardResult res;
  res.path.reserve(M + 1);
  for (int m = 0; m <= M; ++m) {
    Distribution d = initial;
    d.time = initial.time + (m == M ? horizon : m * h);
    d.step = m;
    res.path.push_back(std::move(d));
  }

  std::vector<CollisionRates> rates(M + 1);
  std::vector<double> A((M + 1) * n);  // A[m*n + i] = \int_0^{t_m} a_i

  for (int it = 1; it <= max_iters; ++it) {
    for (int m = 0; m <= M; ++m) rates[m] = collision_rates(res.path[m]);
    for (std::size_t i = 0; i < n; ++i) A[i] = 0.0;
    for (int m = 1; m <= M; ++m)
      for (std::size_t i = 0; i < n; ++i)
        A[m * n + i] = A[(m - 1) * n + i] + 0.5 * h * (rates[m - 1].loss[i] + rates[m].loss[i]);

    double residual = 0.0, f_max = 0.0;
    std::vector<Distribution> next = res.path;
    for (int m = 1; m <= M; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        const double Am = A[m * n + i];
        double duhamel = 0.0;
        for (int l = 0; l <= m; ++l) {
          const double wl = (l == 0 || l == m) ? 0.5 * h : h;
          duhamel += wl * std::exp(-(Am - A[l * n + i])) * rates[l].gain[i];
        }
        const double v = std::exp(-Am) * initial.values[i] + duhamel;
        if (!std::isfinite(v)) throw NumericFault("picard_mild: non-finite iterate", static_cast<std::ptrdiff_t>(i));
        residual = std::max(residual, std::abs(v - res.path[m].values[i]));
        f_max = std::max(f_max, v);
        next[m].values[i] = v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) f_max = std::max(f_max, initial.values[i]);
    res.path = std::move(next);
    res.iterations = it;
    res.residual = residual;
    if (residual <= tol * (1.0 + f_max)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace bn
