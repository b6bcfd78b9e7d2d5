#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qwres/errors.hpp"
#include "qwres/lattice.hpp"

namespace qwres {

// ------------------------------------------------------------ free kernel

/// Exponent n with R_0(kappa)_{jj}(x, y) = -e^{i kappa n}, or nullopt when
/// the entry vanishes.
std::optional<int> kernel_exponent(Chirality j, Site x, Site y);
/// Entry of the free resolvent (U_0 - e^{-i kappa})^{-1}, continued to all kappa.
cplx resolvent_kernel_entry(Chirality j, Site x, Site y, cplx kappa);
/// (R_0(kappa) f) on the requested sites.
WalkState free_resolvent_apply(const WalkState& f, cplx kappa, const std::vector<Site>& sites);

/// Finite sum sum_n c_n e^{i kappa n}.
struct ExpSum {
  std::map<int, cplx> terms;

  void add(int n, cplx c) { terms[n] += c; }
  cplx operator()(cplx kappa) const;
  cplx derivative(cplx kappa) const;
};

// ------------------------------------------------------ interaction matrix

/// M(kappa) with entries (C(x) - I)_{jk} R_0(kappa)_{kk}(x, y + step_k) over
/// a list of sites; det(I + M) is the determinant whose zeros are the
/// eigenvalues and resonances of U.
class InteractionMatrix {
 public:
  enum class Basis { Active, Box };

  explicit InteractionMatrix(const CoinField& coin, Basis basis = Basis::Active);

  Eigen::Index dimension() const { return 4 * static_cast<Eigen::Index>(sites_.size()); }
  const std::vector<Site>& sites() const { return sites_; }
  int max_exponent() const { return max_n_; }

  Eigen::MatrixXcd evaluate(cplx kappa) const;
  Eigen::MatrixXcd derivative(cplx kappa) const;

 private:
  struct Term {
    int row, col;
    cplx coef;
    int n;
  };
  std::vector<Site> sites_;
  std::vector<Term> terms_;
  int max_n_ = 0;
};

/// Full-box M(kappa), m = 4 |box|.
Eigen::MatrixXcd interaction_matrix(const CoinField& coin, cplx kappa);

// ------------------------------------------------------------ determinant

struct DetValue {
  double log_abs = 0.0;
  double phase = 0.0;         ///< in (-pi, pi]
  double pivot_ratio = 1.0;   ///< min |U_ii| / max |U_ii| of the LU factor
  cplx value() const;
};

struct DetResult {
  cplx D;
  cplx dlogD;           ///< NaN when singular
  bool singular = false;  ///< I + M numerically singular; use winding counts instead
};

class Determinant {
 public:
  /// Below this pivot ratio I + M counts as singular.
  static constexpr double kSingularPivot = 1e-13;

  explicit Determinant(const CoinField& coin);

  DetValue evaluate(cplx kappa) const;
  /// D and D'/D together; dlog is NaN when I + M is singular.
  DetValue evaluate(cplx kappa, cplx& dlog) const;
  DetResult value_and_log_derivative(cplx kappa) const;
  const InteractionMatrix& matrix() const { return M_; }
  bool trivial() const { return M_.dimension() == 0; }

 private:
  InteractionMatrix M_;
};

DetResult det_value(const CoinField& coin, cplx kappa);

// ------------------------------------------------------------ root search

/// Axis-aligned rectangle in the kappa-plane.
struct Rect {
  double re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;

  double width() const { return re_hi - re_lo; }
  double height() const { return im_hi - im_lo; }
  double size() const { return std::max(width(), height()); }
  cplx center() const { return {(re_lo + re_hi) / 2, (im_lo + im_hi) / 2}; }
  bool contains(cplx z, double margin = 0.0) const;
  /// Rectangle centred at mu0 with half-widths a eps^s (real) and b eps^s (imaginary).
  static Rect loop(cplx mu0, double eps, double s, double a = 1.0, double b = 1.0);
};

/// Re kappa in [offset, offset + 2 pi], Im kappa in [-depth, top].
Rect fundamental_strip(double depth = 2.0, double top = 1e-6, double offset = -0.012345);

enum class RootKind { Eigenvalue, Resonance };

struct Root {
  cplx kappa;
  int multiplicity = 1;
  RootKind kind = RootKind::Resonance;
  double residual = 0.0;  ///< |D(kappa)|

  cplx w() const;  ///< e^{-i kappa}
};

struct RootSearch {
  std::vector<Root> roots;
  int winding_total = 0;
  Rect region;
};

struct RootOptions {
  double tol = 1e-6;               ///< leaf rectangle size
  double real_axis_tol = 1e-8;     ///< |Im kappa| below this counts as an eigenvalue
  bool normalize = true;           ///< map Re kappa into [0, 2 pi)
};

/// Counts zeros of D inside rectangles by tracking arg D along the boundary.
/// A boundary segment is accepted once its phase increment and its length
/// times |D'/D| at both ends stay below pi/4; the second test keeps a
/// near-boundary multiple zero from hiding a full turn between samples.
/// Edge results are cached, so neighbouring rectangles share work.
class WindingCounter {
 public:
  explicit WindingCounter(const Determinant& det, double step = 0.05);
  /// Throws BoundaryZero when D vanishes on the boundary,
  /// NumericalError when the phase cannot be resolved.
  int winding(const Rect& r);
  std::size_t evaluations() const { return evaluations_; }

 private:
  struct Sample {
    double phase;
    double rate;  ///< |D'/D|
  };
  Sample sample(cplx z);
  double edge(cplx a, cplx b);
  double refine(cplx a, Sample fa, cplx b, Sample fb, int depth);

  const Determinant& det_;
  double step_;
  std::map<std::pair<double, double>, Sample> cache_;
  std::map<std::array<double, 4>, double> edge_cache_;
  std::size_t evaluations_ = 0;
};

/// D vanishes (numerically) on a contour.
class BoundaryZero : public NumericalError {
 public:
  BoundaryZero(cplx where);
  cplx where;
};

int winding_number(const CoinField& coin, const Rect& r);

RootSearch locate_roots(const CoinField& coin, const Rect& region, const RootOptions& opt);
RootSearch locate_roots(const CoinField& coin, const Rect& region, double tol = 1e-6);

// ------------------------------------------------------------- resolvent

/// Continued resolvent R(kappa) = (U - e^{-i kappa})^{-1} through the
/// finite system (I + M) h = (C - I) R_0 f on the active sites.
class ContinuedResolvent {
 public:
  ContinuedResolvent(const CoinField& coin, cplx kappa);

  cplx kappa() const { return kappa_; }
  /// (R f)(x) for every x in sites.
  WalkState apply(const WalkState& f, const std::vector<Site>& sites) const;
  /// (R f, g), linear in f.
  cplx element(const WalkState& f, const WalkState& g) const;

 private:
  CoinField coin_;
  cplx kappa_;
  std::vector<Site> active_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

/// kappa -> (R(kappa) f, g) with all kappa-independent kernel bookkeeping
/// done once.
class ResolventPairing {
 public:
  ResolventPairing(const CoinField& coin, const WalkState& f, const WalkState& g);
  cplx operator()(cplx kappa) const;

 private:
  InteractionMatrix M_;
  ExpSum free_;
  std::vector<ExpSum> rhs_;
  std::vector<ExpSum> row_;
};

/// Contour integral of F along the counterclockwise boundary of r, each edge
/// by Romberg extrapolation of the trapezoid rule until successive levels
/// differ by less than tol.
cplx contour_integral(const std::function<cplx(cplx)>& F, const Rect& r, double tol);

/// (1/2 pi) oint e^{-i mu} (R(mu) f, g) dmu around loop, which must enclose kappa0.
cplx projection_element(const CoinField& coin, cplx kappa0, const Rect& loop,
                        const WalkState& f, const WalkState& g, double tol = 1e-10);

}  // namespace qwres
