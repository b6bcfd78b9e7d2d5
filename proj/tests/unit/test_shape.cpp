#include "doctest.h"

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "qwres/errors.hpp"
#include "qwres/shape.hpp"

using namespace qwres;
using C = Chirality;

TEST_CASE("corner families stay unitary and keep the zero pattern") {
  for (auto p : {CornerPreset::OneCorner, CornerPreset::LeakyCorner, CornerPreset::PhaseCorner})
    for (double eps : {0.0, 0.1, 0.5, 1.0}) {
      CornerFamily fam = make_corner_family(2, 3, eps, p);
      for (const auto& m : fam.matrices) CHECK(unitarity_residual(m) < 1e-13);
      CHECK(fam.deviation() <= eps * (1 + 1e-12) + 1e-15);
      CHECK_NOTHROW(check_zero_pattern(fam));
      CHECK(fam.M0() == 3);
    }
  CHECK_THROWS_AS(make_corner_family(2, 2, 1.5), PreconditionError);
  CHECK_THROWS_AS(make_corner_family(2, 2, -0.1), PreconditionError);
  CHECK(parse_corner_preset("leaky-corner") == CornerPreset::LeakyCorner);
  CHECK(to_string(CornerPreset::PhaseCorner) == "phase-corner");
  CHECK_THROWS_AS(parse_corner_preset("two-corner"), PreconditionError);
}

TEST_CASE("quantization data of the three presets") {
  const double eps = 0.3;
  auto one = corner_quantization(make_corner_family(2, 2, eps, CornerPreset::OneCorner)).data;
  CHECK(std::abs(one.c_plus - std::sqrt(1 - eps * eps)) < 1e-15);
  CHECK(std::abs(one.c_minus - 1.0) < 1e-15);
  CHECK(one.eigenvalue_count() == 8);
  auto leaky = corner_quantization(make_corner_family(2, 2, eps, CornerPreset::LeakyCorner)).data;
  CHECK(leaky.eigenvalue_count() == 0);
  CHECK(std::abs(leaky.c_minus) < 1.0);
  auto phase = corner_quantization(make_corner_family(2, 2, eps, CornerPreset::PhaseCorner)).data;
  CHECK(phase.eigenvalue_count() == 16);
  CHECK(std::abs(phase.c_plus - std::exp(cplx(0, eps))) < 1e-15);
}

TEST_CASE("qc2 roots solve w^N = c") {
  const cplx c = std::polar(0.91, 0.4);
  auto roots = qc2_roots(c, 8);
  REQUIRE(roots.size() == 8);
  for (cplx k : roots) {
    CHECK(std::abs(std::exp(cplx(0, -8) * k) - c) < 1e-14);
    CHECK(k.real() >= 0.0);
    CHECK(k.real() < 2 * std::numbers::pi);
    CHECK(k.imag() == doctest::Approx(std::log(0.91) / 8));
  }
  CHECK(qc2_roots(0.0, 8).empty());
}

TEST_CASE("D-roots of the one-corner model are the qc2 roots") {
  CornerFamily fam = make_corner_family(2, 2, 0.2, CornerPreset::OneCorner);
  auto q = corner_quantization(fam).data;
  RootSearch rs = locate_roots(fam.field(), fundamental_strip(), 1e-7);
  CHECK(rs.winding_total == 16);
  std::vector<cplx> closed = q.kappa_plus;
  closed.insert(closed.end(), q.kappa_minus.begin(), q.kappa_minus.end());
  int total = 0;
  for (const auto& r : rs.roots) {
    total += r.multiplicity;
    double best = 1e9;
    for (cplx k : closed)
      best = std::min(best, std::abs(std::remainder(r.kappa.real() - k.real(), 2 * std::numbers::pi)) +
                                std::abs(r.kappa.imag() - k.imag()));
    CHECK(best < 1e-8);
  }
  CHECK(total == 16);
}

TEST_CASE("resonant states are outgoing eigenfunctions") {
  CornerFamily fam = make_corner_family(2, 1, 0.25, CornerPreset::LeakyCorner);
  CornerQuantization q = corner_quantization(fam);
  CHECK(q.states.size() == 12);
  WalkOperator op(fam.field());
  for (const auto& s : q.states) {
    OutgoingReport rep = verify_outgoing(op, s.state, fam.M0() + 5);
    CHECK_FALSE(rep.trivial);
    CHECK(rep.residual <= 1e-12);
    CHECK(tail_summable(s.state, {0.0, s.kappa.imag() - 0.01}));
    CHECK_FALSE(tail_summable(s.state, {0.0, 0.0}));
  }
  CHECK_THROWS(corner_outgoing_state(fam, 1, {0.3, -0.1}));
}

TEST_CASE("weaving the trivial barrier") {
  BarrierSpec spec = trivial_barrier(1);
  ShapeFamily fam = make_shape_family(spec, 0.3, WeavePolicy::BothAxes);
  for (const auto& [x, m] : fam.coins.overrides()) CHECK(unitarity_residual(m) < 1e-13);
  CHECK(fam.deviation() == doctest::Approx(0.3));
  ConditionCReport rep = condition_c_check(fam.coins);
  CHECK(rep.holds());
  for (const auto& s : rep.sites)
    if (boundary_sides(s.x, 1) == kK1Plus) CHECK(std::abs(s.det_left_down) == doctest::Approx(0.09));
  CHECK_FALSE(condition_c_check(make_shape_family(spec, 0.0, WeavePolicy::BothAxes).coins).holds());
  Mat4 overlapping = Mat4::Identity();
  overlapping(0, 1) = overlapping(1, 0) = std::sqrt(0.5);
  overlapping(0, 0) = std::sqrt(0.5);
  overlapping(1, 1) = -std::sqrt(0.5);
  CHECK_THROWS_AS(weave(overlapping, kK1Minus, 0.2, WeavePolicy::PerSide), PreconditionError);
}

TEST_CASE("perturbation identities") {
  ShapeFamily fam = make_shape_family(trivial_barrier(1), 0.2, WeavePolicy::BothAxes);
  WalkState f = qwres::testing::random_state(1, 41);
  WalkState g = qwres::testing::random_state(1, 42);
  for (cplx k : {cplx(0.7, 0.3), cplx(0.7, -0.3), cplx(2.1, -0.05)}) {
    IdentityReport r = perturbation_identities(fam, k, {0.0, -0.5}, f, g);
    CHECK(r.residual_eps_np < 1e-8);
    CHECK(r.residual_np_eps < 1e-8);
    CHECK(std::abs(r.direct) > 1e-6);
  }
}

TEST_CASE("migration scan around the corner eigenvalues") {
  auto family = [](double e) { return make_corner_family(2, 2, e, CornerPreset::OneCorner).field(); };
  std::vector<double> mu0;
  for (int k = 0; k < 8; ++k) mu0.push_back(std::numbers::pi * k / 4);
  auto rows = migration_scan(family, {0.1}, mu0, 1.0);
  CHECK(rows.size() == 16);
  for (const auto& r : rows) {
    CHECK(r.count == 2);
    CHECK(r.dist_to_mu0 < 0.1);
    CHECK(r.w_abs <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(migration_scan(family, {0.5}, mu0, 1.0), PreconditionError);
  auto empty = migration_scan(family, {0.1}, {std::numbers::pi / 8}, 0.5);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].count == 0);
  CHECK(std::isnan(empty[0].root.real()));
}

TEST_CASE("projection difference shrinks with eps") {
  BarrierSpec spec = trivial_barrier(1);
  WalkState f = qwres::testing::random_state(1, 7);
  WalkState g = qwres::testing::random_state(1, 8);
  double prev = 1e9;
  for (double eps : {0.2, 0.1, 0.05}) {
    double v = std::abs(projection_difference(make_shape_family(spec, eps, WeavePolicy::BothAxes),
                                              std::numbers::pi / 2, 0.5, f, g));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("root drift: linear for phase-corner, quadratic for one-corner") {
  std::vector<double> mu0;
  for (int k = 0; k < 8; ++k) mu0.push_back(std::numbers::pi * k / 4);
  auto fitted = [&](CornerPreset p) {
    std::vector<double> r;
    for (double eps : {0.05, 0.1, 0.2}) {
      auto rows = migration_scan([&](double e) { return make_corner_family(2, 2, e, p).field(); },
                                 {eps}, mu0, 1.0);
      double m = 0.0;
      for (const auto& row : rows) m = std::max(m, row.dist_to_mu0 / eps);
      r.push_back(m);
    }
    return r;
  };
  auto phase = fitted(CornerPreset::PhaseCorner);
  for (double v : phase) CHECK(v == doctest::Approx(phase[0]).epsilon(0.2));
  CHECK(phase[0] == doctest::Approx(1.0 / 8).epsilon(1e-6));
  auto one = fitted(CornerPreset::OneCorner);
  CHECK(one[1] / one[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(one[2] / one[1] == doctest::Approx(2.0).epsilon(0.05));
}
