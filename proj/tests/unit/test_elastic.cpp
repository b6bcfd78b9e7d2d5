#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "qwres/elastic.hpp"
#include "qwres/errors.hpp"
#include "qwres/presets.hpp"

using namespace qwres;
using C = Chirality;

namespace {

bool near_set(double v, const std::vector<double>& ref, double tol) {
  for (double r : ref)
    if (std::abs(std::remainder(v - r, 2 * std::numbers::pi)) < tol) return true;
  return false;
}

}  // namespace

TEST_CASE("corner model: two counter-rotating orbits of period 8") {
  PermutationCoin pc = corner_permutation(2, 2);
  TraceResult r = trace_trajectory(pc, {0, 0}, C::Left);
  REQUIRE(std::holds_alternative<ClosedOrbit>(r));
  const auto& orbit = std::get<ClosedOrbit>(r);
  CHECK(orbit.period() == 8);
  CHECK(orbit.phase_sum == 0.0);

  std::vector<double> expected;
  for (int k = 0; k < 8; ++k) expected.push_back(std::numbers::pi * k / 4);
  auto spec = qc_spectrum(orbit);
  REQUIRE(spec.size() == 8);
  for (double l : spec) CHECK(near_set(l, expected, 1e-12));

  TrappingReport rep = classify_trapping(pc);
  CHECK_FALSE(rep.non_trapping);
  CHECK(rep.orbits.size() == 2);
  for (const auto& o : rep.orbits) CHECK(o.period() == 8);
}

TEST_CASE("non-square corner: period 2(m0 + n0)") {
  TrappingReport rep = classify_trapping(corner_permutation(3, 1));
  REQUIRE(rep.orbits.size() == 2);
  CHECK(rep.orbits[0].period() == 8);
  CHECK(classify_trapping(corner_permutation(1, 4)).orbits[0].period() == 10);
}

TEST_CASE("single corner coin: every start escapes") {
  std::map<Site, PermutationEntry> m;
  m[{0, 0}].sigma = {C::Up, C::Left, C::Right, C::Down};
  PermutationCoin pc(1, m);
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (C j : kChiralities) CHECK(std::holds_alternative<Escaped>(trace_trajectory(pc, {a, b}, j)));
  CHECK(classify_trapping(pc).non_trapping);
}

TEST_CASE("orbit eigenfunctions solve U u = e^{-i lambda} u") {
  PermutationCoin pc = random_permutation_coin(2, 4, 1.0);
  TrappingReport rep = classify_trapping(pc);
  WalkOperator op(pc.to_coin_field());
  for (const auto& orbit : rep.orbits)
    for (double l : qc_spectrum(orbit)) {
      WalkState u = build_orbit_eigenfunction(orbit, l);
      CHECK(u.norm() == doctest::Approx(1.0));
      WalkState lhs = op.apply(u);
      WalkState rhs = std::exp(cplx(0, -l)) * u;
      CHECK(lhs.max_abs_diff(rhs) < 1e-12);
    }
  if (!rep.orbits.empty())
    CHECK_THROWS_AS(build_orbit_eigenfunction(rep.orbits[0], 1e-3 + qc_spectrum(rep.orbits[0])[0]),
                    PreconditionError);
}

TEST_CASE("closed iff bounded under the quantum walk") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    PermutationCoin pc = random_permutation_coin(2, seed);
    WalkOperator op(pc.to_coin_field());
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b)
        for (C j : kChiralities) {
          TraceResult r = trace_trajectory(pc, {a, b}, j);
          WalkState u = WalkState::delta({a, b}, j);
          int maxd = 0;
          for (int t = 0; t < 300; ++t) {
            u = op.apply(u);
            REQUIRE(u.size() == 1);
            maxd = std::max(maxd, chebyshev(u.support()[0]));
          }
          CHECK(std::holds_alternative<ClosedOrbit>(r) == (maxd <= 3));
        }
  }
}

TEST_CASE("permutation coins round-trip through coin fields") {
  PermutationCoin pc = random_permutation_coin(2, 8);
  PermutationCoin back = PermutationCoin::from_coin_field(pc.to_coin_field());
  for (const auto& [x, e] : pc.entries())
    for (C j : kChiralities) {
      CHECK(back.output(x, j) == pc.output(x, j));
      CHECK(std::abs(std::remainder(back.phase(x, j) - pc.phase(x, j), 2 * std::numbers::pi)) < 1e-12);
    }
  CHECK_THROWS_AS(PermutationCoin::from_coin_field(random_coin_field(1, 3)), PreconditionError);
}

TEST_CASE("phase sums shift the quantized spectrum") {
  PermutationCoin base = corner_permutation(1, 1);
  auto entries = base.entries();
  entries[{0, 0}].alpha = {0.4, 0.0, 0.0, 0.0};
  PermutationCoin pc(1, entries);
  for (const auto& orbit : classify_trapping(pc).orbits) {
    double total = 0.0;
    for (double b : orbit.beta) total += b;
    CHECK(total == doctest::Approx(orbit.phase_sum));
    for (double l : qc_spectrum(orbit))
      CHECK(std::abs(std::remainder(orbit.period() * l + orbit.phase_sum, 2 * std::numbers::pi)) < 1e-12);
  }
}
