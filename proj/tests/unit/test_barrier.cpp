#include "doctest.h"

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "qwres/barrier.hpp"
#include "qwres/errors.hpp"
#include "qwres/translation.hpp"

using namespace qwres;
using C = Chirality;

TEST_CASE("boundary sides of the box") {
  CHECK(boundary_sides({-1, 0}, 1) == kK1Minus);
  CHECK(boundary_sides({1, 1}, 1) == (kK1Plus | kK2Plus));
  CHECK(boundary_sides({0, 0}, 1) == kNoSide);
  CHECK(boundary_sites(1).size() == 8);
  CHECK(boundary_sites(3).size() == 24);
}

TEST_CASE("pinned rows") {
  Mat4 t = trivial_boundary_coin();
  CHECK(unitarity_residual(t) < 1e-15);
  CHECK_NOTHROW(check_pinned_rows(t, kK1Minus | kK1Plus | kK2Minus | kK2Plus, {1, 1}));
  CHECK_THROWS_AS(check_pinned_rows(Mat4::Identity(), kK2Plus, {0, 1}), PreconditionError);
  BarrierSpec s = trivial_barrier(1);
  s.boundary[{1, 0}] = Mat4::Identity();
  CHECK_THROWS_AS(s.validate(), PreconditionError);
}

TEST_CASE("interior state count N = 8 M0 (2 M0 + 1)") {
  CHECK(InteriorGraph(1).N() == 24);
  CHECK(InteriorGraph(2).N() == 80);
  CHECK(InteriorGraph(3).N() == 168);
  InteriorGraph g(1);
  // (x, j) is interior when x and x - step(j) both lie in the box.
  CHECK(g.contains({1, 0}, C::Right));
  CHECK_FALSE(g.contains({-1, 0}, C::Right));
  CHECK_FALSE(g.contains({2, 0}, C::Right));
  CHECK(g.contains({0, 0}, C::Up));
}

TEST_CASE("trivial barrier: no leakage, unit-modulus spectrum") {
  NonPenetrable np = build_nonpenetrable(trivial_barrier(1));
  CHECK(np.leakage <= 1e-12);
  CHECK(np.exterior.non_trapping);
  InteriorUnitary iu = interior_spectrum(np.graph, np.coin);
  CHECK(iu.graph.N() == 24);
  CHECK(iu.modulus_residual < 1e-10);
  CHECK(iu.unitarity_residual < 1e-12);
  auto m = iu.multiplicities();
  REQUIRE(m.size() == 4);
  const std::vector<int> expected = {10, 2, 10, 2};
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(m[k].first - k * std::numbers::pi / 2) < 1e-8);
    CHECK(m[k].second == expected[k]);
  }
}

TEST_CASE("interior unitary commutes with restriction") {
  BarrierSpec spec = random_interior_barrier(2, 5);
  NonPenetrable np = build_nonpenetrable(spec);
  CHECK(np.leakage <= 1e-12);
  WalkOperator op(np.coin);
  Eigen::VectorXcd v = qwres::testing::random_vector(np.graph.N(), 12);
  Eigen::MatrixXcd U = interior_matrix(np.graph, np.coin);
  Eigen::VectorXcd via_walk = np.graph.restrict(op.apply(np.graph.embed(v)));
  CHECK((via_walk - U * v).norm() < 1e-12);
}

TEST_CASE("Green formula against a direct solve") {
  InteriorUnitary iu = [] {
    NonPenetrable np = build_nonpenetrable(random_interior_barrier(1, 3));
    return interior_spectrum(np.graph, np.coin);
  }();
  const int N = iu.graph.N();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXcd f = qwres::testing::random_vector(N, 100 + trial);
    const cplx kappa(0.5 + trial, -0.3 + 0.15 * trial);
    const cplx w = std::exp(cplx(0, -1) * kappa);
    Eigen::VectorXcd direct = (iu.U - w * I).partialPivLu().solve(f);
    CHECK((green_apply(iu, kappa, f) - direct).norm() < 1e-10 * direct.norm());

    const cplx theta(0.0, -0.4);
    Eigen::VectorXcd wt = iu.graph.weights(theta);
    Eigen::VectorXcd weighted =
        wt.cwiseProduct((iu.U - w * I).partialPivLu().solve(f.cwiseQuotient(wt)));
    CHECK((green_apply(iu, kappa, f, theta) - weighted).norm() < 1e-9 * weighted.norm());
  }
  CHECK_THROWS_AS(green_apply(iu, {iu.phases[0], 0.0}, Eigen::VectorXcd::Ones(N)), PreconditionError);
}

TEST_CASE("resolvent norm on a loop is the inverse distance to the spectrum") {
  NonPenetrable np = build_nonpenetrable(trivial_barrier(1));
  InteriorUnitary iu = interior_spectrum(np.graph, np.coin);
  const double mu0 = std::numbers::pi / 2;
  for (double eps : {0.1, 0.05}) {
    const double h = std::sqrt(eps);
    CHECK(norm_on_loop(iu, mu0, eps, 0.5) == doctest::Approx(1.0 / (1.0 - std::exp(-h))).epsilon(1e-9));
  }
  CHECK_THROWS_AS(norm_on_loop(iu, mu0, 0.9, 0.5, 2.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(norm_on_loop(iu, mu0, 0.1, 0.5, 1.0, 1.0, 16), PreconditionError);
}

TEST_CASE("translation weights on interior states") {
  InteriorGraph g(1);
  const cplx theta(0.2, -0.5);
  Eigen::VectorXcd w = g.weights(theta);
  for (int k = 0; k < g.N(); ++k)
    CHECK(std::abs(w[k] - translation_weight(g.states[k].p, g.states[k].q, theta)) < 1e-15);
}
