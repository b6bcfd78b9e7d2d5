#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include "qwres/lattice.hpp"

namespace qwres::testing {

/// Random state with Gaussian amplitudes on every site of [-r, r]^2.
inline WalkState random_state(int r, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  WalkState u;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (Chirality c : kChiralities) u.set({a, b}, c, {n(gen), n(gen)});
  return u;
}

inline Eigen::VectorXcd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {d(gen), d(gen)};
  return v;
}

inline double dist(std::complex<double> a, std::complex<double> b) { return std::abs(a - b); }

}  // namespace qwres::testing
