#pragma once

#include <array>
#include <string>
#include <vector>

#include "qwres/barrier.hpp"
#include "qwres/elastic.hpp"
#include "qwres/spectral.hpp"
#include "qwres/translation.hpp"

namespace qwres {

// ------------------------------------------------------------ corner family

enum class CornerPreset {
  OneCorner,    ///< rotates columns ← and ↑ at (0,0): |c+| < 1, c- = 1
  LeakyCorner,  ///< also rotates columns ↓ and → at (0,0): |c+|, |c-| < 1
  PhaseCorner,  ///< column ← at (0,0) picks up e^{i eps}: |c+| = |c-| = 1
};

CornerPreset parse_corner_preset(const std::string& s);
std::string to_string(CornerPreset p);

struct CornerFamily {
  int m0 = 2, n0 = 2;
  double eps = 0.0;
  CornerPreset preset = CornerPreset::OneCorner;
  std::array<Site, 4> corners;     ///< (0,0), (m0,0), (m0,n0), (0,n0)
  std::array<Mat4, 4> matrices;    ///< C_eps at the corners
  std::array<Mat4, 4> unperturbed; ///< elastic corner coins

  int M0() const { return std::max(m0, n0); }
  int period() const { return 2 * (m0 + n0); }
  CoinField field() const;
  CoinField unperturbed_field() const;
  /// max over corners of |C_eps - C_el|_inf.
  double deviation() const;
};

/// Throws PreconditionError for eps outside [0, 1] or a broken zero pattern.
CornerFamily make_corner_family(int m0, int n0, double eps,
                                CornerPreset preset = CornerPreset::OneCorner);
/// Throws PreconditionError if one of the eight pattern entries is nonzero.
void check_zero_pattern(const CornerFamily& fam);

struct QuantizationData {
  cplx c_plus, c_minus;
  int N = 0;                       ///< 2 (m0 + n0)
  std::vector<cplx> kappa_plus;    ///< roots of e^{-i N kappa} = c_plus, Re in [0, 2 pi)
  std::vector<cplx> kappa_minus;
  int eigenvalue_count() const;
};

/// Resonant state along one orbit family (sign = +1 for the orbit through
/// (0,0) with chirality ←, -1 for its reverse).
struct ResonantState {
  int sign = 1;
  cplx kappa;
  OutgoingState state;
};

struct CornerQuantization {
  QuantizationData data;
  std::vector<ResonantState> states;  ///< one per resonance
};

/// Roots of w^N = c with w = e^{-i kappa}.
std::vector<cplx> qc2_roots(cplx c, int N);
CornerQuantization corner_quantization(const CornerFamily& fam);
/// Builds the outgoing solution for a root kappa of the sign's condition.
OutgoingState corner_outgoing_state(const CornerFamily& fam, int sign, cplx kappa);

// ------------------------------------------------------------- shape family

enum class WeavePolicy {
  PerSide,   ///< rotate (←,→) on K1± and (↓,↑) on K2±
  BothAxes,  ///< rotate both pairs at every K site
};

struct ShapeFamily {
  BarrierSpec base;
  double eps = 0.0;
  WeavePolicy policy = WeavePolicy::PerSide;
  CoinField np;     ///< U_np coins
  CoinField coins;  ///< U_eps coins

  double deviation() const;
};

/// C_eps(x) = C_np(x) R(eps) on K, where R rotates the selected chirality
/// pairs by (sqrt(1-eps^2), eps).
ShapeFamily make_shape_family(const BarrierSpec& spec, double eps,
                              WeavePolicy policy = WeavePolicy::PerSide);
Mat4 weave(const Mat4& c_np, unsigned sides, double eps, WeavePolicy policy);

struct SiteCondition {
  Site x;
  cplx det_left_down, det_right_up;  ///< clause 1 pair
  cplx det_left_up, det_right_down;  ///< clause 2 pair
};

struct ConditionCReport {
  std::vector<SiteCondition> sites;  ///< every site of the box
  bool clause1 = true;
  bool clause2 = true;
  std::vector<Site> clause1_failures, clause2_failures;
  bool holds() const { return clause1 || clause2; }
};

ConditionCReport condition_c_check(const CoinField& coin, double tol = 1e-12);

// ------------------------------------------------------------------- scans

struct ScanRow {
  double eps;
  double mu0;
  int count;
  cplx root;  ///< NaN when count is 0
  double w_abs;
  double dist_to_mu0;
};

/// For each eps and mu0 counts D-roots inside the loop centred at mu0 with
/// half-width eps^s; one row per located root.
std::vector<ScanRow> migration_scan(const std::function<CoinField(double)>& family,
                                    const std::vector<double>& eps_grid,
                                    const std::vector<double>& mu0_list, double s,
                                    double tol = 1e-7);

// ------------------------------------------------------ perturbation checks

struct IdentityReport {
  cplx direct;     ///< (R_eps f, g) - (R_np f, g)
  cplx eps_np;     ///< (R_eps Q R_np f, g)
  cplx np_eps;     ///< (R_np Q R_eps f, g)
  double residual_eps_np = 0.0;
  double residual_np_eps = 0.0;
};

/// Q = U_np - U_eps applied to a state known on the sites where the coins differ.
WalkState apply_coin_difference(const ShapeFamily& fam, const WalkState& h);

IdentityReport perturbation_identities(const ShapeFamily& fam, cplx kappa, cplx theta,
                                       const WalkState& f, const WalkState& g);

/// <(P_eps - P_np) f, g> on the loop around mu0 with half-width eps^s.
cplx projection_difference(const ShapeFamily& fam, double mu0, double s, const WalkState& f,
                           const WalkState& g);

}  // namespace qwres
