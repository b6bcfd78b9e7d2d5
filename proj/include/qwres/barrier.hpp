#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qwres/elastic.hpp"
#include "qwres/lattice.hpp"

namespace qwres {

/// Sides of the box boundary K a site belongs to (bit flags).
enum BoundarySide : unsigned {
  kNoSide = 0,
  kK1Minus = 1,  ///< x1 = -M0: row ← pinned to e→
  kK1Plus = 2,   ///< x1 = +M0: row → pinned to e←
  kK2Minus = 4,  ///< x2 = -M0: row ↓ pinned to e↑
  kK2Plus = 8,   ///< x2 = +M0: row ↑ pinned to e↓
};

unsigned boundary_sides(Site x, int M0);
std::vector<Site> boundary_sites(int M0);

/// Throws PreconditionError naming the first pinned row of c that differs
/// from the non-penetrable form for the given sides.
void check_pinned_rows(const Mat4& c, unsigned sides, Site x);

/// Reflecting block coin [[0,1,0,0],[1,0,0,0],[0,0,0,1],[0,0,1,0]].
Mat4 trivial_boundary_coin();

struct BarrierSpec {
  int M0 = 1;
  std::map<Site, Mat4> interior;  ///< coins on the box minus K (identity if absent)
  std::map<Site, Mat4> boundary;  ///< coins on K (trivial coin if absent)
  std::string interior_label = "identity";

  void validate() const;
  CoinField coin_field() const;
};

BarrierSpec trivial_barrier(int M0);
/// Trivial boundary around independent Haar coins on the inner sites.
BarrierSpec random_interior_barrier(int M0, std::uint64_t seed);

/// Directed edges of the box graph, identified with the interior amplitudes
/// (x, j): the edge x - step(j) -> x.
struct InteriorGraph {
  int M0 = 1;
  std::vector<PhasePoint> states;
  std::map<PhasePoint, int> index;

  explicit InteriorGraph(int M0 = 1);
  int N() const { return static_cast<int>(states.size()); }
  bool contains(Site x, Chirality j) const { return index.count({x, j}) != 0; }
  std::pair<Site, Site> edge(int k) const;
  Eigen::VectorXcd restrict(const WalkState& u) const;
  WalkState embed(const Eigen::VectorXcd& v) const;
  /// Diagonal of T(theta) on the interior basis.
  Eigen::VectorXcd weights(cplx theta) const;
};

struct ExteriorDescriptor {
  std::vector<PhasePoint> boundary_inputs;  ///< exterior amplitudes sitting on K
  std::size_t starts_traced = 0;
  bool non_trapping = true;
};

struct NonPenetrable {
  CoinField coin;
  InteriorGraph graph;
  ExteriorDescriptor exterior;
  double leakage = 0.0;  ///< max over basis states of the norm crossing between H_i and H_e
};

NonPenetrable build_nonpenetrable(const BarrierSpec& spec);

struct InteriorUnitary {
  InteriorGraph graph;
  Eigen::MatrixXcd U;
  Eigen::VectorXcd eigenvalues;
  Eigen::VectorXd phases;    ///< kappa_j in [0, 2 pi) with eigenvalue e^{-i kappa_j}
  Eigen::MatrixXcd vectors;  ///< orthonormal eigenvectors as columns
  double unitarity_residual = 0.0;
  double modulus_residual = 0.0;
  double gram_residual = 0.0;
  double eigen_residual = 0.0;

  /// Distinct phases with multiplicities (phases closer than tol merge).
  std::vector<std::pair<double, int>> multiplicities(double tol = 1e-8) const;
};

/// Matrix of U restricted to the interior subspace.
Eigen::MatrixXcd interior_matrix(const InteriorGraph& g, const CoinField& coin);
InteriorUnitary interior_spectrum(const InteriorGraph& g, const CoinField& coin);

/// Resolvent of U_i by eigen-expansion, optionally conjugated by T(theta).
Eigen::VectorXcd green_apply(const InteriorUnitary& iu, cplx kappa, const Eigen::VectorXcd& f,
                             cplx theta = 0.0);

/// Largest resolvent norm over samples on the loop around mu0 with
/// half-widths a eps^s and b eps^s.
double norm_on_loop(const InteriorUnitary& iu, double mu0, double eps, double s,
                    double a = 1.0, double b = 1.0, int samples = 64);

}  // namespace qwres
