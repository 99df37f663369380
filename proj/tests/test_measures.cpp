#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bn/diagnostics.hpp"
#include "bn/io.hpp"
#include "bn/measures.hpp"

using namespace bn;

namespace {

GridPtr grid(int n, double x_max = 20.0, Grading g = Grading::power(2.0)) {
  GridSpec s;
  s.node_count = n;
  s.x_max = x_max;
  s.grading = g;
  return build_grid(s);
}

// brute force over a dense set of origins; atoms on an edge are excluded
double brute_atoms(const std::vector<Atom>& atoms, double beta) {
  double best = 0.0;
  for (const auto& a : atoms) {
    for (double R : {a.position - 1.0 + 1e-9, a.position - 1e-9, 0.0}) {
      if (R < 0.0) continue;
      double s = 0.0;
      for (const auto& b : atoms) {
        if (b.position > R && b.position < R + 1.0) s += b.mass * std::exp(beta * b.position);
      }
      best = std::max(best, s);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("window geometries") {
  CHECK(gbeta_norm_measure({{{2.0, 1.0}}, {}}, 1.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(gbeta_norm_measure({{{0.25, 1.0}, {1.75, 1.0}}, {}}, 1.0) == doctest::Approx(std::exp(1.75)).epsilon(1e-14));
  CHECK(gbeta_norm_measure({{{0.2, 1.0}, {0.9, 1.0}}, {}}, 1.0) ==
        doctest::Approx(std::exp(0.2) + std::exp(0.9)).epsilon(1e-14));
  // exactly one apart: no open window holds both
  CHECK(gbeta_norm_measure({{{1.0, 1.0}, {2.0, 1.0}}, {}}, 1.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(gbeta_norm_measure({}, 1.2) == 0.0);
}

TEST_CASE("atom norm against brute force") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    std::vector<Atom> atoms(1 + c % 12);
    for (auto& a : atoms) a = {6.0 * u(rng), 0.1 + u(rng)};
    CHECK(gbeta_norm_measure({atoms, {}}, 1.3) == doctest::Approx(brute_atoms(atoms, 1.3)).epsilon(1e-12));
  }
}

TEST_CASE("argument checks") {
  CHECK_THROWS(gbeta_norm_measure({{{1.0, 1.0}}, {}}, 0.0));
  CHECK_THROWS(gbeta_norm_measure({{{-1.0, 1.0}}, {}}, 1.2));
  CHECK_THROWS(gbeta_norm_measure({{{1.0, 0.0}}, {}}, 1.2));
  CHECK_THROWS(in_gbeta_class({{{1.0, 1.0}}, {}}, {1.0, 10.0}));
  CHECK(in_gbeta_class({{{1.0, 1.0}}, {}}, {1.2, 10.0}));
  CHECK_FALSE(in_gbeta_class({{{1.0, 1.0}}, {}}, {1.2, 3.0}));
  CHECK_THROWS(mass_bound_check({}, 1.1));
}

TEST_CASE("mass bound") {
  const auto one = mass_bound_check({{{7.3, 1.0}}, {}}, 1.2);
  CHECK(one.pass);
  CHECK(one.bound == doctest::Approx(3.0 * std::exp(1.2 * 7.3)));
  const auto empty = mass_bound_check({}, 1.2);
  CHECK(empty.pass);
  CHECK(empty.total_mass == 0.0);
  CHECK(empty.bound == 0.0);

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Atom> atoms(1000);
  for (auto& a : atoms) a = {10.0 * u(rng), 0.01 + u(rng)};
  CHECK(mass_bound_check({atoms, {}}, 1.2).pass);
}

TEST_CASE("density part matches the gridded norm") {
  const auto g = grid(96, 12.0);
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow((g->node(i) - 3.0) / 0.8, 2));
  const Distribution d(g, v);
  CHECK(gbeta_norm_measure({{}, d}, 1.2) == doctest::Approx(gbeta_norm(d, 1.2)).epsilon(1e-12));
  // a window that holds the atom and the density peak
  const double mixed = gbeta_norm_measure({{{3.0, 0.5}}, d}, 1.2);
  CHECK(mixed >= gbeta_norm(d, 1.2) + 0.5 * std::exp(3.6) * (1.0 - 1e-12));
  CHECK(mixed <= gbeta_norm(d, 1.2) + 0.5 * std::exp(3.6) * (1.0 + 1e-12));
}

TEST_CASE("subadditive and homogeneous") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    std::vector<Atom> a(1 + c % 7), b(1 + c % 5);
    for (auto& x : a) x = {5.0 * u(rng), 0.1 + u(rng)};
    for (auto& x : b) x = {5.0 * u(rng), 0.1 + u(rng)};
    std::vector<Atom> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double na = gbeta_norm_measure({a, {}}, 1.5), nb = gbeta_norm_measure({b, {}}, 1.5);
    CHECK(gbeta_norm_measure({ab, {}}, 1.5) <= (na + nb) * (1.0 + 1e-14));
    std::vector<Atom> scaled = a;
    for (auto& x : scaled) x.mass *= 3.0;
    CHECK(gbeta_norm_measure({scaled, {}}, 1.5) == doctest::Approx(3.0 * na).epsilon(1e-14));
  }
}

TEST_CASE("existence horizon") {
  const double T = existence_horizon(1.0, 2.0, 1.2, 2.0, 0.01);
  CHECK(T == doctest::Approx(1.0 / (0.01 * 4.0 * 3.0) - 1.0 / (2.0 * std::sqrt(1.2))).epsilon(1e-14));
  // kappa barely above the norm leaves no time at all
  CHECK(existence_horizon(1.0, 2.0, 1.2, 1.0 + 1e-9, 1.0) == 0.0);
  CHECK(existence_horizon(1.0, 2.0, 1.2, 2.0, 0.02) < T);
  CHECK_THROWS(existence_horizon(1.0, 2.0, 1.2, 1.0, 1.0));
  CHECK_THROWS(existence_horizon(1.0, 2.0, 1.0, 2.0, 1.0));
  CHECK_THROWS(existence_horizon(1.0, 0.0, 1.2, 2.0, 1.0));
  CHECK_THROWS(existence_horizon(1.0, 2.0, 1.2, 2.0, 0.0));
}

TEST_CASE("singular initial data") {
  const auto base = grid(2000, 20.0);
  const auto d = singular_init(0.75, 1.0, 1.0, base);
  CHECK(d.grid->spec().singular_exponent == 0.75);
  // \int_0^1 x^{-3/4} e^{-x} dx, mpmath
  CHECK(local_mass(d, 1.0) == doctest::Approx(3.3793543683906937).epsilon(1e-6));
  for (std::size_t i = 0; i < d.size(); i += 97)
    CHECK(d.values[i] == doctest::Approx(std::pow(d.grid->node(i), -0.75) * std::exp(-d.grid->node(i))).epsilon(1e-15));
  CHECK_THROWS(singular_init(1.0, 1.0, 1.0, base));
  CHECK_THROWS(singular_init(0.5, 0.0, 1.0, base));

  const auto s = singular_init(0.75, 1.0, 2.0, grid(128));
  const double norm = gbeta_norm(s, 1.2);
  CHECK(std::isfinite(norm));
  CHECK(norm == doctest::Approx(gbeta_window(s, 1.2, 0.0)).epsilon(1e-12));
}

TEST_CASE("measure files") {
  const RadonMeasure mu{{{0.5, 2.0}, {1.0 / 3.0, 0.25}}, {}};
  std::stringstream ss;
  write_measure(ss, mu);
  const auto back = read_measure(ss);
  REQUIRE(back.atoms.size() == 2);
  CHECK(back.atoms[1].position == 1.0 / 3.0);
  CHECK(back.atoms[0].mass == 2.0);

  const auto dir = std::filesystem::temp_directory_path() / "bn_measure_test";
  std::filesystem::create_directories(dir);
  const auto g = grid(16);
  std::vector<double> v(g->size(), 0.5);
  save_checkpoint((dir / "dens.dat").string(), Distribution(g, v));
  std::stringstream with("# comment\natom 1 1\ndensity dens.dat\n");
  const auto m = read_measure(with, dir.string());
  REQUIRE(m.density);
  CHECK(m.density->values == v);
  CHECK(m.total_mass() == doctest::Approx(1.0 + 0.5 * 20.0));

  std::stringstream bad("atom 1\n");
  CHECK_THROWS(read_measure(bad));
  std::stringstream unknown("blob 1 2\n");
  CHECK_THROWS(read_measure(unknown));
  std::stringstream negative("atom -1 2\n");
  CHECK_THROWS(read_measure(negative));
  std::filesystem::remove_all(dir);
}
