#include <cmath>
#include <numbers>

#include "qwres/errors.hpp"
#include "qwres/spectral.hpp"

namespace qwres {

namespace {

const cplx I1(0, 1);

// sum_j conj(g_j(x)) K_j(x, y) over supp g, as an exponential sum, for a
// fixed source (y, j).
void add_pairing(ExpSum& out, const WalkState& g, Chirality j, Site y, cplx weight) {
  for (const auto& [x, a] : g.sites()) {
    cplx gx = a[index(j)];
    if (gx == cplx{}) continue;
    if (auto n = kernel_exponent(j, x, y)) out.add(*n, -weight * std::conj(gx));
  }
}

}  // namespace

// ------------------------------------------------------ ContinuedResolvent

ContinuedResolvent::ContinuedResolvent(const CoinField& coin, cplx kappa)
    : coin_(coin), kappa_(kappa), active_(coin.active_sites()) {
  if (active_.empty()) return;
  InteractionMatrix M(coin_);
  Eigen::MatrixXcd A = M.evaluate(kappa);
  A.diagonal().array() += 1.0;
  lu_.compute(A);
  const auto& LU = lu_.matrixLU();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index i = 0; i < LU.rows(); ++i) {
    lo = std::min(lo, std::abs(LU(i, i)));
    hi = std::max(hi, std::abs(LU(i, i)));
  }
  if (!(hi > 0) || lo / hi < Determinant::kSingularPivot)
    throw NumericalError("resolvent evaluated at a pole");
}

WalkState ContinuedResolvent::apply(const WalkState& f, const std::vector<Site>& sites) const {
  WalkState out = free_resolvent_apply(f, kappa_, sites);
  if (active_.empty()) return out;
  const Eigen::Index m = 4 * static_cast<Eigen::Index>(active_.size());
  WalkState r0 = free_resolvent_apply(f, kappa_, active_);
  Eigen::VectorXcd b(m);
  for (std::size_t a = 0; a < active_.size(); ++a) {
    Amp4 v = r0.at(active_[a]);
    Eigen::Vector4cd vv(v[0], v[1], v[2], v[3]);
    b.segment<4>(4 * a) = (coin_.at(active_[a]) - Mat4::Identity()) * vv;
  }
  Eigen::VectorXcd h = lu_.solve(b);
  for (Site x : sites) {
    Amp4 corr{};
    for (std::size_t a = 0; a < active_.size(); ++a)
      for (Chirality j : kChiralities) {
        cplx hv = h[4 * a + index(j)];
        if (hv == cplx{}) continue;
        if (auto n = kernel_exponent(j, x, active_[a] + step(j)))
          corr[index(j)] -= std::exp(I1 * kappa_ * double(*n)) * hv;
      }
    Amp4 cur = out.at(x);
    for (int j = 0; j < 4; ++j) cur[j] -= corr[j];
    for (Chirality j : kChiralities) out.set(x, j, cur[index(j)]);
  }
  return out;
}

cplx ContinuedResolvent::element(const WalkState& f, const WalkState& g) const {
  return apply(f, g.support()).inner(g);
}

// -------------------------------------------------------- ResolventPairing

ResolventPairing::ResolventPairing(const CoinField& coin, const WalkState& f, const WalkState& g)
    : M_(coin) {
  for (const auto& [y, a] : f.sites())
    for (Chirality j : kChiralities)
      if (a[index(j)] != cplx{}) add_pairing(free_, g, j, y, a[index(j)]);

  const auto& act = M_.sites();
  rhs_.resize(4 * act.size());
  row_.resize(4 * act.size());
  for (std::size_t s = 0; s < act.size(); ++s) {
    Mat4 B = coin.at(act[s]) - Mat4::Identity();
    // (R_0 f)_l at act[s] as exponential sums
    std::array<ExpSum, 4> r0;
    for (const auto& [y, a] : f.sites())
      for (Chirality l : kChiralities) {
        if (a[index(l)] == cplx{}) continue;
        if (auto n = kernel_exponent(l, act[s], y)) r0[index(l)].add(*n, -a[index(l)]);
      }
    for (int j = 0; j < 4; ++j)
      for (int l = 0; l < 4; ++l) {
        if (B(j, l) == cplx{}) continue;
        for (const auto& [n, c] : r0[l].terms) rhs_[4 * s + j].add(n, B(j, l) * c);
      }
    for (Chirality j : kChiralities) add_pairing(row_[4 * s + index(j)], g, j, act[s] + step(j), 1.0);
  }
}

cplx ResolventPairing::operator()(cplx kappa) const {
  cplx v = free_(kappa);
  if (rhs_.empty()) return v;
  const Eigen::Index m = static_cast<Eigen::Index>(rhs_.size());
  Eigen::MatrixXcd A = M_.evaluate(kappa);
  A.diagonal().array() += 1.0;
  Eigen::VectorXcd b(m), r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = rhs_[i](kappa);
    r[i] = row_[i](kappa);
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  Eigen::VectorXcd h = lu.solve(b);
  return v - (r.transpose() * h)(0, 0);
}

// ---------------------------------------------------------- projections

cplx projection_element(const CoinField& coin, cplx kappa0, const Rect& loop,
                        const WalkState& f, const WalkState& g, double tol) {
  if (!loop.contains(kappa0) || !(loop.width() > 0) || !(loop.height() > 0))
    throw PreconditionError("loop must be a proper rectangle enclosing kappa0");
  Determinant det(coin);
  WindingCounter wc(det);
  wc.winding(loop);  // throws when a root sits on the loop
  ResolventPairing pair(coin, f, g);
  auto F = [&](cplx mu) { return std::exp(-I1 * mu) * pair(mu); };
  return contour_integral(F, loop, tol * 2.0 * std::numbers::pi) / (2.0 * std::numbers::pi);
}

}  // namespace qwres
