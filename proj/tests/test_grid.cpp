#include <doctest.h>

#include <cmath>
#include <random>

#include "bn/grid.hpp"

using namespace bn;

namespace {

GridSpec make_spec(int n, double x_max, Grading g) {
  GridSpec s;
  s.node_count = n;
  s.x_max = x_max;
  s.grading = g;
  return s;
}

Distribution constant(const GridPtr& g, double v) { return Distribution(g, std::vector<double>(g->size(), v)); }

}  // namespace

TEST_CASE("uniform grid of 8 nodes on [0,1]") {
  auto g = build_grid(make_spec(8, 1.0, Grading::uniform()));
  REQUIRE(g->size() == 8);
  for (int k = 0; k < 8; ++k) CHECK(g->node(k) == doctest::Approx(0.125 * (k + 1)).epsilon(1e-15));
  double sum = 0.0;
  for (double w : g->weights()) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("power grid places the first node at x_max (1/N)^p") {
  auto g = build_grid(make_spec(100, 10.0, Grading::power(2.0)));
  CHECK(g->node(0) == doctest::Approx(0.001).epsilon(1e-14));
  CHECK(g->x_max() == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("geometric grid gaps grow by the ratio") {
  auto g = build_grid(make_spec(64, 20.0, Grading::geometric(1.1)));
  for (std::size_t k = 2; k < g->size(); ++k) {
    const double ratio = (g->node(k) - g->node(k - 1)) / (g->node(k - 1) - g->node(k - 2));
    CHECK(std::abs(ratio - 1.1) < 1e-12);
  }
}

TEST_CASE("pinned first node") {
  GridSpec s = make_spec(32, 20.0, Grading::geometric(1.3));
  s.first_node = 1e-6;
  auto g = build_grid(s);
  CHECK(g->node(0) == doctest::Approx(1e-6).epsilon(1e-14));
  CHECK(g->x_max() == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS(build_grid(make_spec(7, 1.0, Grading::uniform())));
  CHECK_THROWS(build_grid(make_spec(16, 0.0, Grading::uniform())));
  CHECK_THROWS(build_grid(make_spec(16, -1.0, Grading::power(2.0))));
  CHECK_THROWS(build_grid(make_spec(16, 1.0, Grading::geometric(1.0))));
  CHECK_THROWS(build_grid(make_spec(16, 1.0, Grading::power(0.5))));
  GridSpec s = make_spec(16, 1.0, Grading::uniform());
  s.first_node = 1.0;
  CHECK_THROWS(build_grid(s));
  s.first_node = 2.0;
  CHECK_THROWS(build_grid(s));
}

TEST_CASE("weights sum to x_max for every grading") {
  for (auto g : {Grading::uniform(), Grading::power(2.0), Grading::power(3.0), Grading::geometric(1.05)}) {
    auto grid = build_grid(make_spec(77, 20.0, g));
    CHECK(std::abs(integrate(constant(grid, 1.0), 0.0) - 20.0) / 20.0 < 1e-12);
    for (double w : grid->weights()) CHECK(w > 0.0);
  }
}

TEST_CASE("moments of f = 1 on [0,1]") {
  auto g = build_grid(make_spec(4000, 1.0, Grading::uniform()));
  const auto one = constant(g, 1.0);
  CHECK(integrate(one, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
  CHECK(integrate(one, 1.5) == doctest::Approx(0.4).epsilon(1e-5));
  CHECK(mass(one) == integrate(one, 0.5));
  CHECK(integrate(Distribution::zeros(g), 0.5) == 0.0);
}

TEST_CASE("second-order convergence of the mass of e^{-x}") {
  // Gamma(3/2) minus the tail beyond 20
  const double exact = std::sqrt(M_PI) / 2.0 * std::erf(std::sqrt(20.0)) - std::sqrt(20.0) * std::exp(-20.0);
  double prev = 0.0;
  for (int n : {64, 128, 256, 512}) {
    auto g = build_grid(make_spec(n, 20.0, Grading::power(2.0)));
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g->node(i));
    const double err = std::abs(mass(Distribution(g, v)) - exact);
    if (prev > 0.0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("sample interpolates linearly with constant extension below x_1") {
  auto g = build_grid(make_spec(10, 10.0, Grading::uniform()));
  std::vector<double> v(10, 0.0);
  v[3] = 1.0;
  v[4] = 3.0;
  Distribution d(g, v);
  CHECK(sample(d, g->node(3)) == 1.0);
  CHECK(sample(d, g->node(4)) == 3.0);
  CHECK(sample(d, 0.5 * (g->node(3) + g->node(4))) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sample(d, g->x_max() + 1.0) == 0.0);
  v[0] = 5.0;
  Distribution d0(g, v);
  CHECK(sample(d0, 0.0) == 5.0);
  CHECK(sample(d0, 0.5 * g->node(0)) == 5.0);
  CHECK_THROWS(sample(d0, -1.0));
  CHECK_THROWS(sample(d0, NAN));
}

TEST_CASE("sample stays between neighbouring node values") {
  auto g = build_grid(make_spec(40, 5.0, Grading::power(2.0)));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(g->size());
  for (double& f : v) f = u(rng);
  Distribution d(g, v);
  for (int t = 0; t < 2000; ++t) {
    const double x = g->node(0) + u(rng) * (g->x_max() - g->node(0));
    const auto i = static_cast<std::size_t>(g->locate(x));
    const double s = sample(d, x);
    CHECK(s >= 0.0);
    if (i + 1 < g->size()) {
      CHECK(s >= std::min(v[i], v[i + 1]) - 1e-15);
      CHECK(s <= std::max(v[i], v[i + 1]) + 1e-15);
    }
  }
}

TEST_CASE("singular weights integrate x^{-3/4} exactly") {
  GridSpec s = make_spec(64, 1.0, Grading::power(2.0));
  s.singular_exponent = 0.75;
  auto g = build_grid(s);
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(g->node(i), -0.75);
  const double x1 = g->node(0);
  CHECK(g->integrate_range(v, 0.0, x1) == doctest::Approx(4.0 * std::pow(x1, 0.25)).epsilon(1e-13));
  CHECK(integrate(Distribution(g, v), 0.0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(g->integrate_range(v, 0.0, 0.3) == doctest::Approx(4.0 * std::pow(0.3, 0.25)).epsilon(1e-13));
  for (double w : g->weights()) CHECK(w > 0.0);
}

TEST_CASE("singular weights converge at second order on x^{-3/4} e^{-x}") {
  // \int_0^1 x^{-3/4} e^{-x} dx = lower incomplete gamma(1/4, 1)
  const double exact = 3.3793543683906937;
  double prev = 0.0;
  for (int n : {32, 64, 128, 256}) {
    GridSpec s = make_spec(n, 1.0, Grading::power(2.0));
    s.singular_exponent = 0.75;
    auto g = build_grid(s);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(g->node(i), -0.75) * std::exp(-g->node(i));
    const double err = std::abs(integrate(Distribution(g, v), 0.0) - exact);
    if (prev > 0.0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("distribution validation") {
  auto g = build_grid(make_spec(8, 1.0, Grading::uniform()));
  CHECK_THROWS(Distribution(g, std::vector<double>(8, -1.0)).validate());
  CHECK_THROWS(Distribution(g, std::vector<double>(7, 1.0)).validate());
  CHECK_THROWS(Distribution(g, std::vector<double>(8, INFINITY)).validate());
  CHECK_NOTHROW(Distribution(g, std::vector<double>(8, 0.0)).validate());
}

TEST_CASE("explicit nodes and weights") {
  GridSpec s = make_spec(8, 1.0, Grading::uniform());
  std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, w(8, 0.1);
  EnergyGrid g(s, x, w);
  CHECK(g.x_max() == 0.8);
  CHECK_THROWS(EnergyGrid(s, {0.2, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, w));
  CHECK_THROWS(EnergyGrid(s, x, std::vector<double>(8, 0.0)));
}
