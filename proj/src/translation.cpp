#include "qwres/translation.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qwres/errors.hpp"

namespace qwres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx reduce(cplx theta) {
  return {std::remainder(theta.real(), kTwoPi), theta.imag()};
}

cplx expi(cplx a) { return std::exp(cplx(0, 1) * a); }

}  // namespace

cplx translation_weight(Chirality c, Site x, cplx theta) {
  cplx t = reduce(theta);
  switch (c) {
    case Chirality::Left: return expi(t * double(x.x1));
    case Chirality::Right: return expi(-t * double(x.x1));
    case Chirality::Down: return expi(t * double(x.x2));
    case Chirality::Up: return expi(-t * double(x.x2));
  }
  return 1.0;
}

WalkState apply_T_theta(cplx theta, const WalkState& u) {
  WalkState out;
  for (const auto& [x, a] : u.sites()) {
    Amp4 b;
    for (Chirality c : kChiralities)
      b[index(c)] = a[index(c)] * translation_weight(c, x, theta);
    out.add(x, b);
  }
  return out;
}

WalkState apply_U_theta(const WalkOperator& op, cplx theta, const WalkState& u) {
  return apply_T_theta(theta, op.apply(apply_T_theta(-theta, u)));
}

// ------------------------------------------------------------ OutgoingState

cplx OutgoingState::amplitude(Site x, Chirality c) const {
  if (chebyshev(x) <= M0) return core.amplitude(x, c);
  auto coef = [](const std::map<int, cplx>& m, int k) {
    auto it = m.find(k);
    return it == m.end() ? cplx{} : it->second;
  };
  const cplx i(0, 1);
  switch (c) {
    case Chirality::Left:
      return x.x1 < -M0 ? coef(tail_left, x.x2) * std::exp(-i * kappa * double(x.x1)) : 0.0;
    case Chirality::Right:
      return x.x1 > M0 ? coef(tail_right, x.x2) * std::exp(i * kappa * double(x.x1)) : 0.0;
    case Chirality::Down:
      return x.x2 < -M0 ? coef(tail_down, x.x1) * std::exp(-i * kappa * double(x.x2)) : 0.0;
    case Chirality::Up:
      return x.x2 > M0 ? coef(tail_up, x.x1) * std::exp(i * kappa * double(x.x2)) : 0.0;
  }
  return 0.0;
}

void OutgoingState::validate() const {
  if (M0 < 1) throw PreconditionError("outgoing state needs M0 >= 1");
  for (const auto& [x, a] : core.sites())
    if (chebyshev(x) > M0)
      for (const auto& v : a)
        if (v != cplx{})
          throw PreconditionError("outgoing core amplitude outside the box");
  for (const auto* t : {&tail_left, &tail_right, &tail_down, &tail_up})
    for (const auto& [k, v] : *t)
      if (std::abs(k) > M0 && v != cplx{})
        throw PreconditionError("outgoing tail coefficient outside [-M0, M0]");
}

bool OutgoingState::trivial() const {
  for (const auto& [x, a] : core.sites())
    for (const auto& v : a)
      if (v != cplx{}) return false;
  for (const auto* t : {&tail_left, &tail_right, &tail_down, &tail_up})
    for (const auto& [k, v] : *t)
      if (v != cplx{}) return false;
  return true;
}

OutgoingState OutgoingState::from_ring(cplx kappa, int M0, const WalkState& u) {
  OutgoingState s;
  s.kappa = kappa;
  s.M0 = M0;
  const cplx i(0, 1);
  const double r = M0 + 1;
  for (const auto& [x, a] : u.sites()) {
    if (chebyshev(x) <= M0) {
      s.core.add(x, a);
      continue;
    }
    auto put = [](std::map<int, cplx>& m, int k, cplx v) {
      if (v != cplx{}) m[k] = v;
    };
    if (x.x1 == -(M0 + 1) && std::abs(x.x2) <= M0)
      put(s.tail_left, x.x2, a[0] * std::exp(i * kappa * -r));
    if (x.x1 == M0 + 1 && std::abs(x.x2) <= M0)
      put(s.tail_right, x.x2, a[1] * std::exp(-i * kappa * r));
    if (x.x2 == -(M0 + 1) && std::abs(x.x1) <= M0)
      put(s.tail_down, x.x1, a[2] * std::exp(i * kappa * -r));
    if (x.x2 == M0 + 1 && std::abs(x.x1) <= M0)
      put(s.tail_up, x.x1, a[3] * std::exp(-i * kappa * r));
  }
  return s;
}

OutgoingReport verify_outgoing(const WalkOperator& op, const OutgoingState& s,
                               int window) {
  if (!(s.kappa.imag() < 0))
    throw PreconditionError("outgoing states need Im kappa < 0");
  if (window < op.coin().M0() + 2 || window < s.M0 + 2)
    throw PreconditionError("window must cover the perturbation support plus one step");
  s.validate();

  OutgoingReport rep;
  rep.window = window;
  rep.kappa_im = s.kappa.imag();
  rep.trivial = s.trivial();
  for (const auto* t : {&s.tail_left, &s.tail_right, &s.tail_down, &s.tail_up})
    for (const auto& [k, v] : *t) rep.tail_norm = std::max(rep.tail_norm, std::abs(v));

  // (Uu)(x) only needs u on the window dilated by one.
  WalkState u;
  for (int a = -window - 1; a <= window + 1; ++a)
    for (int b = -window - 1; b <= window + 1; ++b)
      for (Chirality c : kChiralities) {
        cplx v = s.amplitude({a, b}, c);
        if (v != cplx{}) u.set({a, b}, c, v);
      }
  WalkState uu = op.apply(u);
  const cplx w = std::exp(cplx(0, -1) * s.kappa);
  for (int a = -window; a <= window; ++a)
    for (int b = -window; b <= window; ++b)
      for (Chirality c : kChiralities) {
        Site x{a, b};
        double r = std::abs(uu.amplitude(x, c) - w * s.amplitude(x, c));
        rep.residual = std::max(rep.residual, r);
      }
  return rep;
}

bool tail_summable(const OutgoingState& s, cplx theta) {
  bool empty = true;
  for (const auto* t : {&s.tail_left, &s.tail_right, &s.tail_down, &s.tail_up})
    for (const auto& [k, v] : *t)
      if (v != cplx{}) empty = false;
  return empty || theta.imag() < s.kappa.imag();
}

double tail_norm_squared(const OutgoingState& s, cplx theta) {
  if (!tail_summable(s, theta)) return std::numeric_limits<double>::infinity();
  // |T(theta)u| on a tail decays like r^{|x|} with r = e^{-2 Im(kappa - theta)}.
  const double r = std::exp(-2.0 * (s.kappa - theta).imag());
  double geo = std::pow(r, s.M0 + 1) / (1.0 - r);
  double sum = 0.0;
  for (const auto* t : {&s.tail_left, &s.tail_right, &s.tail_down, &s.tail_up})
    for (const auto& [k, v] : *t) {
      if (v == cplx{}) continue;
      sum += std::norm(v) * geo;
    }
  return sum;
}

}  // namespace qwres
