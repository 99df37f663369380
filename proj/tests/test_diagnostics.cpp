#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bn/collision.hpp"
#include "bn/diagnostics.hpp"
#include "bn/integrator.hpp"

using namespace bn;

namespace {

GridPtr grid(int n, double x_max = 20.0, Grading g = Grading::power(2.0)) {
  GridSpec s;
  s.node_count = n;
  s.x_max = x_max;
  s.grading = g;
  return build_grid(s);
}

Distribution from(const GridPtr& g, double (*fn)(double)) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g->node(i));
  return Distribution(g, v);
}

Trajectory synthetic(const std::vector<double>& t, const std::vector<double>& l, double delta = 1.0) {
  Trajectory tr;
  tr.delta = delta;
  for (std::size_t k = 0; k < t.size(); ++k) {
    DiagnosticsRecord r;
    r.time = t[k];
    r.l1_local = l[k];
    r.mass = 1.0;
    tr.records.push_back(r);
  }
  tr.stop_reason = StopReason::blowup_threshold;
  return tr;
}

}  // namespace

TEST_CASE("weighted_sup examples") {
  const auto g = grid(64);
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(1.0 + g->node(i), -9.0);
  CHECK(std::abs(weighted_sup(Distribution(g, v), 0.0, 9.0) - 1.0) <= 1e-12);
  CHECK(weighted_sup(Distribution::zeros(g), 0.0, 9.0) == 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / std::sqrt(g->node(i));
  CHECK(weighted_sup(Distribution(g, v), 0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("weighted_sup is absolutely homogeneous") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = grid(50);
  std::vector<double> v(g->size());
  for (double& f : v) f = u(rng);
  const Distribution d(g, v);
  for (double lambda : {0.5, 2.0, 8.0}) {
    Distribution s = d;
    for (double& f : s.values) f *= lambda;
    CHECK(weighted_sup(s, 0.3, 4.0) == lambda * weighted_sup(d, 0.3, 4.0));
  }
}

TEST_CASE("local_mass examples") {
  const auto u = grid(100, 1.0, Grading::uniform());
  const Distribution one(u, std::vector<double>(100, 1.0));
  CHECK(std::abs(local_mass(one, 0.5) - 0.5) <= 1e-12);
  CHECK(std::abs(local_mass(one, 0.505) - 0.505) <= 1e-12);
  const auto g = grid(64);
  const auto e = from(g, [](double x) { return std::exp(-x); });
  CHECK(local_mass(e, g->x_max()) == doctest::Approx(integrate(e, 0.0)).epsilon(1e-14));

  GridSpec s;
  s.node_count = 128;
  s.x_max = 20.0;
  s.singular_exponent = 0.75;
  const auto sg = build_grid(s);
  const auto sing = from(sg, [](double x) { return std::pow(x, -0.75); });
  CHECK(local_mass(sing, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("gbeta_norm examples") {
  const auto fine = grid(4000, 4.0, Grading::uniform());
  auto b = from(fine, [](double x) { return std::exp(-std::pow((x - 2.0) / 0.01, 2)); });
  const double l1 = integrate(b, 0.0);
  for (double& f : b.values) f /= l1;
  CHECK(gbeta_norm(b, 1.0) == doctest::Approx(std::exp(2.0)).epsilon(0.01));
  CHECK(gbeta_norm(Distribution::zeros(fine), 1.2) == 0.0);
  const auto e2 = from(fine, [](double x) { return std::exp(-2.0 * x); });
  CHECK(gbeta_norm(e2, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("every window is dominated by the norm") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = grid(80, 12.0);
  for (int c = 0; c < 20; ++c) {
    std::vector<double> v(g->size());
    for (double& f : v) f = u(rng) * std::exp(-2.0 * u(rng) * g->node(&f - v.data()));
    const Distribution d(g, v);
    const double norm = gbeta_norm(d, 1.5);
    for (int k = 0; k < 200; ++k) CHECK(gbeta_window(d, 1.5, 11.0 * u(rng)) <= norm * (1.0 + 1e-12));
  }
}

TEST_CASE("mass bound on random densities") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = grid(96, 15.0);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> v(g->size());
    const double center = 15.0 * u(rng), width = 0.02 + 3.0 * u(rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow((g->node(i) - center) / width, 2)) + 0.1 * u(rng) * std::exp(-g->node(i));
    const Distribution d(g, v);
    for (double beta : {1.2, 2.0, 4.0}) CHECK(integrate(d, 0.0) <= 3.0 * gbeta_norm(d, beta));
  }
}

TEST_CASE("tails decay at rate beta/2 under window control") {
  // covering bound: \int_{x>R} x^{3/2} f <= ||f|| e^{-beta R/2} S / (1 - e^{-beta/2}),
  // S = sup_y (1+y)^{3/2} e^{-beta y/2}
  const double beta = 1.2;
  const auto g = grid(200, 30.0);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double S = 0.0;
  for (double y = 0.0; y < 60.0; y += 1e-3) S = std::max(S, std::pow(1.0 + y, 1.5) * std::exp(-beta * y / 2.0));
  for (int c = 0; c < 30; ++c) {
    std::vector<double> v(g->size());
    const double decay = beta + 0.1 + u(rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (0.5 + u(rng)) * std::exp(-decay * g->node(i));
    const Distribution d(g, v);
    const double norm = gbeta_norm(d, beta);
    std::vector<double> h(g->size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::pow(g->node(i), 1.5) * v[i];
    for (double R : {0.0, 2.0, 5.0, 10.0, 20.0}) {
      const double tail = g->integrate_range(h, R, g->x_max());
      CHECK(tail <= norm * std::exp(-beta * R / 2.0) * S / (1.0 - std::exp(-beta / 2.0)));
    }
  }
}

TEST_CASE("kappa_bound") {
  const double base = 1.0 - 2.5 * std::exp(1.0) / 8.0;
  CHECK(kappa_bound(9.0, 0.0, 1e-300, 1.0, 1.0) == doctest::Approx(base).epsilon(1e-15));
  const double expected = base - (std::pow(2.0, 10) * 27.0 / 8.0 + std::pow(2.0, 9) * 2.0 + (1.0 + std::pow(2.0, 10))) * 1e-6;
  CHECK(kappa_bound(9.0, 0.0, 1e-6, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-14));
  double prev = kappa_bound(9.0, 0.5, 1e-7, 2.0, 3.0);
  for (int k = 2; k < 50; ++k) {
    const double v = kappa_bound(9.0, 0.5, k * 1e-7, 2.0, 3.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS(kappa_bound(2.5 * std::exp(1.0) + 1.0, 0.0, 1e-6, 1.0, 1.0));
  const double T = kappa_time_window(9.0, 0.0, 1.0, 1.0, 0.1);
  CHECK(kappa_bound(9.0, 0.0, T, 1.0, 1.0) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("blow-up lower bound") {
  CHECK(blowup_lower_bound(0.5, 1.0, 0.0, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(blowup_lower_bound(1.0 - 1e-12, 1.0, 1.0, 1.0) > 1e5);
  CHECK(riccati_constant(1.0, 1.0) == 2.0);
  CHECK(riccati_constant(10.0, 1.0) == 10.0);
  CHECK_THROWS(blowup_lower_bound(1.0, 1.0, 1.0, 1.0));
}

TEST_CASE("riccati_check") {
  SUBCASE("constant zero trajectory") {
    const auto tr = synthetic({0.0, 0.1, 0.2, 0.3}, {0.0, 0.0, 0.0, 0.0});
    const auto rep = riccati_check(tr, 1.0);
    CHECK(rep.pass());
    CHECK(rep.checked == 2);
  }
  SUBCASE("a growth rate far beyond the cubic is flagged") {
    const auto tr = synthetic({0.0, 0.001, 0.002, 0.003}, {1.0, 11.0, 21.0, 31.0});
    const auto rep = riccati_check(tr, 1.0);
    CHECK_FALSE(rep.pass());
  }
  SUBCASE("a live subcritical run") {
    GridSpec s;
    s.node_count = 48;
    const auto d = from(build_grid(s), [](double x) { return 0.5 * std::exp(-std::pow((x - 1.5) / 0.6, 2)); });
    StepControls c;
    c.t_end = 0.5;
    const auto res = run(d, c, RunOptions{});
    CHECK(riccati_check(res.trajectory, 1.0).pass());
    CHECK_THROWS(riccati_check(res.trajectory, 0.5));
  }
}

TEST_CASE("blow-up fit on its own model") {
  std::vector<double> t, l;
  for (int k = 0; k < 200; ++k) {
    const double tk = 1.0 - std::pow(10.0, -0.02 * k);
    t.push_back(tk);
    l.push_back(1.0 / std::sqrt(2.0 * (1.0 - tk)));
  }
  const auto fit = fit_blowup_time(t, l);
  CHECK(std::abs(fit.t_star - 1.0) <= 1e-10);
  CHECK(fit.c_offset == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(fit.t_star > fit.t_hi);
  CHECK(fit.residual >= 0.0);
  CHECK_THROWS(fit_blowup_time({0.0, 0.1, 0.2}, {1.0, 1.5, 2.0}));
}

TEST_CASE("profile exponent of a pure power") {
  GridSpec s;
  s.node_count = 96;
  s.grading = Grading::geometric(1.2);
  const auto d = from(build_grid(s), [](double x) { return std::pow(x, -7.0 / 6.0); });
  CHECK(std::abs(fit_profile_exponent(d) - 7.0 / 6.0) <= 1e-6);
  const double x1 = d.grid->node(0);
  CHECK(std::abs(fit_profile_exponent(d, 10 * x1, 100 * x1) - 7.0 / 6.0) <= 1e-6);
  CHECK(profile_peak(d) == x1);

  auto tr = synthetic({0.0, 0.5, 0.9, 0.99, 0.999}, {1.0, 1.4, 3.2, 10.0, 31.6});
  tr.snapshots.push_back(d);
  const auto fit = blowup_fit(tr, 1.0);
  CHECK(std::abs(fit.exponent - 7.0 / 6.0) <= 1e-6);
  CHECK(std::abs(fit.origin_exponent - 7.0 / 6.0) <= 1e-6);
  CHECK(fit.window_lo == doctest::Approx(10 * x1));
  tr.stop_reason = StopReason::reached_t_end;
  CHECK_THROWS(blowup_fit(tr, 1.0));
}

TEST_CASE("comparison function") {
  CHECK(comparison_lambda(0.0, 3.0, 5.0) == 1.0);
  CHECK(comparison_lambda(0.1, 1.0, 1.0) == doctest::Approx(std::exp(1.5)).epsilon(1e-14));
  const auto phi0 = comparison_profile(0.0, 2.0, 1.0);
  CHECK(phi0(0.5) == 2.0);
  CHECK(phi0(4.0) == 0.5);
  double prev = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double l = comparison_lambda(0.05 * k, 1.5, 2.0);
    CHECK(l >= prev);
    prev = l;
  }
  CHECK_THROWS(comparison_profile(0.0, 0.5, 1.0));
}

TEST_CASE("verify_comparison") {
  GridSpec s;
  s.node_count = 32;
  const auto g = build_grid(s);
  Trajectory zero;
  zero.snapshots.push_back(Distribution::zeros(g));
  zero.snapshots.push_back(Distribution::zeros(g, 0.3));
  const auto rep = verify_comparison(zero, 1.0);
  CHECK(rep.pass);
  CHECK(rep.min_C == 1.0);

  Trajectory bad;
  bad.snapshots.push_back(Distribution(g, std::vector<double>(32, 2.0)));
  CHECK_THROWS(verify_comparison(bad, 1.0));
}

TEST_CASE("loss lower-bound ratio") {
  GridSpec s;
  s.node_count = 32;
  CHECK_THROWS(loss_lowerbound_ratio(Distribution::zeros(build_grid(s))));

  // narrow low bump at x = 1: the linear term dominates and the ratio at x = 1 is 2/3
  const auto g = grid(400, 2.0, Grading::uniform());
  REQUIRE(g->node(199) == doctest::Approx(1.0).epsilon(1e-15));
  const auto d = from(g, [](double x) { return 1e-6 * std::exp(-std::pow((x - 1.0) / 0.02, 2)); });
  const auto ratios = loss_lowerbound_ratios(d);
  CHECK(ratios[199] == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  for (double r : ratios) CHECK(r > 0.0);
}

TEST_CASE("diagnostics CSV round trip") {
  std::vector<DiagnosticsRecord> rows(3);
  for (int k = 0; k < 3; ++k) {
    rows[k].time = 0.1 * k + 1.0 / 3.0;
    rows[k].mass = std::sqrt(2.0) + k;
    rows[k].supxf = M_PI * k;
    rows[k].dt = 1e-17 * k;
  }
  std::stringstream ss;
  write_diagnostics_csv(ss, rows);
  CHECK(ss.str().rfind("t,mass,energy,l1_total,l1_local,wsup,supxf,gbeta,dt\n", 0) == 0);
  const auto back = read_diagnostics_csv(ss);
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(back[k].time == rows[k].time);
    CHECK(back[k].mass == rows[k].mass);
    CHECK(back[k].supxf == rows[k].supxf);
    CHECK(back[k].dt == rows[k].dt);
  }
  std::stringstream bad("x,y\n1,2\n");
  CHECK_THROWS(read_diagnostics_csv(bad));
}
