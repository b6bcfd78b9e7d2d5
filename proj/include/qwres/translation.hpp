#pragma once

#include <map>

#include "qwres/lattice.hpp"

namespace qwres {

/// Weight of component c at x under T(theta): e^{i theta x1} for ←,
/// e^{-i theta x1} for →, e^{i theta x2} for ↓, e^{-i theta x2} for ↑.
cplx translation_weight(Chirality c, Site x, cplx theta);

WalkState apply_T_theta(cplx theta, const WalkState& u);
/// U(theta) = T(theta) U T(theta)^{-1}.
WalkState apply_U_theta(const WalkOperator& op, cplx theta, const WalkState& u);

/// Generalized eigenfunction with outgoing tails beyond the box:
///   u_←(x) = a_←(x2) e^{-i kappa x1}, x1 < -M0
///   u_→(x) = a_→(x2) e^{ i kappa x1}, x1 >  M0
///   u_↓(x) = a_↓(x1) e^{-i kappa x2}, x2 < -M0
///   u_↑(x) = a_↑(x1) e^{ i kappa x2}, x2 >  M0
/// and zero for every other component outside the box.
struct OutgoingState {
  cplx kappa;
  int M0 = 1;
  WalkState core;  ///< amplitudes on the box
  std::map<int, cplx> tail_left, tail_right, tail_down, tail_up;

  cplx amplitude(Site x, Chirality c) const;
  /// Throws PreconditionError when tails or core leave their allowed ranges.
  void validate() const;
  bool trivial() const;
  /// Reads core and tail coefficients off amplitudes given on the box
  /// dilated by one (the outermost ring fixes the tails).
  static OutgoingState from_ring(cplx kappa, int M0, const WalkState& u);
};

struct OutgoingReport {
  double residual = 0.0;   ///< max |(Uu - e^{-i kappa} u)(x)| on the window
  int window = 0;
  bool trivial = false;
  double kappa_im = 0.0;   ///< summable for every theta with Im theta below this
  double tail_norm = 0.0;  ///< max |a_j| over all tails
};

OutgoingReport verify_outgoing(const WalkOperator& op, const OutgoingState& s,
                               int window);

/// Closed-form sum of |T(theta)u|^2 over the tail region; +inf when not summable.
double tail_norm_squared(const OutgoingState& s, cplx theta);
bool tail_summable(const OutgoingState& s, cplx theta);

}  // namespace qwres
