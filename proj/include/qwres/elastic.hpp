#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "qwres/lattice.hpp"

namespace qwres {

/// Elastic coin at one site: column j is e^{i alpha[j]} e_{sigma[j]}.
struct PermutationEntry {
  std::array<Chirality, 4> sigma = kChiralities;
  std::array<double, 4> alpha{};

  Mat4 matrix() const;
};

class PermutationCoin {
 public:
  explicit PermutationCoin(int M0 = 1, std::map<Site, PermutationEntry> entries = {});
  /// Reads permutations and phases off a coin field; throws PreconditionError
  /// unless every override is a phase-weighted permutation to tol.
  static PermutationCoin from_coin_field(const CoinField& coin, double tol = 1e-12);

  int M0() const { return M0_; }
  bool in_box(Site x) const { return chebyshev(x) <= M0_; }
  Chirality output(Site x, Chirality in) const;
  double phase(Site x, Chirality in) const;
  const std::map<Site, PermutationEntry>& entries() const { return entries_; }
  CoinField to_coin_field() const;

 private:
  int M0_;
  std::map<Site, PermutationEntry> entries_;
};

struct PhasePoint {
  Site q;
  Chirality p;
  auto operator<=>(const PhasePoint&) const = default;
};

/// Samples Phi(t) = (q(t), p(t)) from an origin with phase increments
/// beta[t] = alpha_{p(t)}(q(t)).
struct Trajectory {
  PhasePoint origin;
  std::vector<PhasePoint> samples;
  std::vector<double> beta;
};

struct ClosedOrbit {
  std::vector<PhasePoint> cycle;  ///< Phi(0..N-1); Phi(N) = Phi(0)
  std::vector<double> beta;       ///< beta[t] for t = 0..N-1
  double phase_sum = 0.0;

  int period() const { return static_cast<int>(cycle.size()); }
  /// Same orbit rotated to start at its smallest phase point.
  ClosedOrbit canonical() const;
};

struct Escaped {
  Trajectory path;  ///< up to the first sample whose ray misses the box
};

using TraceResult = std::variant<ClosedOrbit, Escaped>;

TraceResult trace_trajectory(const PermutationCoin& coin, Site y, Chirality j);

/// lambda_k = (-phase_sum + 2 pi k)/N reduced to [0, 2 pi), k = 0..N-1.
std::vector<double> qc_spectrum(const ClosedOrbit& orbit);

/// Unit-norm eigenfunction f_t along the orbit with U u = e^{-i lambda} u.
WalkState build_orbit_eigenfunction(const ClosedOrbit& orbit, double lambda);

struct TrappingReport {
  std::vector<ClosedOrbit> orbits;  ///< canonical, sorted by first point
  std::size_t starts_traced = 0;
  bool non_trapping = true;
};

TrappingReport classify_trapping(const PermutationCoin& coin);

/// Random elastic field: each box site gets a random permutation and
/// phases with probability p_override, identity otherwise.
PermutationCoin random_permutation_coin(int M0, std::uint64_t seed,
                                        double p_override = 0.5,
                                        bool random_phases = true);

}  // namespace qwres
