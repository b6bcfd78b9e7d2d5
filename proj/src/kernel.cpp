#include <cmath>
#include <numbers>

#include "qwres/errors.hpp"
#include "qwres/spectral.hpp"

namespace qwres {

namespace {
const cplx I1(0, 1);
}

std::optional<int> kernel_exponent(Chirality j, Site x, Site y) {
  switch (j) {
    case Chirality::Left:
      if (y.x2 == x.x2 && y.x1 >= x.x1) return y.x1 - x.x1 + 1;
      break;
    case Chirality::Right:
      if (y.x2 == x.x2 && y.x1 <= x.x1) return x.x1 - y.x1 + 1;
      break;
    case Chirality::Down:
      if (y.x1 == x.x1 && y.x2 >= x.x2) return y.x2 - x.x2 + 1;
      break;
    case Chirality::Up:
      if (y.x1 == x.x1 && y.x2 <= x.x2) return x.x2 - y.x2 + 1;
      break;
  }
  return std::nullopt;
}

cplx resolvent_kernel_entry(Chirality j, Site x, Site y, cplx kappa) {
  auto n = kernel_exponent(j, x, y);
  if (!n) return 0.0;
  return -std::exp(I1 * kappa * double(*n));
}

WalkState free_resolvent_apply(const WalkState& f, cplx kappa, const std::vector<Site>& sites) {
  WalkState out;
  for (Site x : sites) {
    Amp4 v{};
    for (const auto& [y, a] : f.sites())
      for (Chirality c : kChiralities) {
        if (a[index(c)] == cplx{}) continue;
        if (auto n = kernel_exponent(c, x, y))
          v[index(c)] -= std::exp(I1 * kappa * double(*n)) * a[index(c)];
      }
    out.add(x, v);
  }
  return out;
}

cplx ExpSum::operator()(cplx kappa) const {
  cplx s{};
  for (const auto& [n, c] : terms) s += c * std::exp(I1 * kappa * double(n));
  return s;
}

cplx ExpSum::derivative(cplx kappa) const {
  cplx s{};
  for (const auto& [n, c] : terms) s += c * I1 * double(n) * std::exp(I1 * kappa * double(n));
  return s;
}

// ------------------------------------------------------ InteractionMatrix

InteractionMatrix::InteractionMatrix(const CoinField& coin, Basis basis)
    : sites_(basis == Basis::Active ? coin.active_sites() : coin.box_sites()) {
  const int m = static_cast<int>(sites_.size());
  for (int a = 0; a < m; ++a) {
    Mat4 B = coin.at(sites_[a]) - Mat4::Identity();
    for (int b = 0; b < m; ++b)
      for (Chirality k : kChiralities) {
        auto n = kernel_exponent(k, sites_[a], sites_[b] + step(k));
        if (!n) continue;
        for (int j = 0; j < 4; ++j) {
          cplx c = B(j, index(k));
          if (c == cplx{}) continue;
          terms_.push_back({4 * a + j, 4 * b + index(k), -c, *n});
          max_n_ = std::max(max_n_, *n);
        }
      }
  }
}

Eigen::MatrixXcd InteractionMatrix::evaluate(cplx kappa) const {
  const Eigen::Index m = dimension();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, m);
  std::vector<cplx> pw(max_n_ + 1);
  pw[0] = 1.0;
  for (int n = 1; n <= max_n_; ++n) pw[n] = std::exp(I1 * kappa * double(n));
  for (const auto& t : terms_) M(t.row, t.col) += t.coef * pw[t.n];
  return M;
}

Eigen::MatrixXcd InteractionMatrix::derivative(cplx kappa) const {
  const Eigen::Index m = dimension();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& t : terms_)
    M(t.row, t.col) += t.coef * I1 * double(t.n) * std::exp(I1 * kappa * double(t.n));
  return M;
}

Eigen::MatrixXcd interaction_matrix(const CoinField& coin, cplx kappa) {
  return InteractionMatrix(coin, InteractionMatrix::Basis::Box).evaluate(kappa);
}

// ------------------------------------------------------------ Determinant

cplx DetValue::value() const { return std::polar(std::exp(log_abs), phase); }

Determinant::Determinant(const CoinField& coin) : M_(coin) {}

namespace {

DetValue lu_det(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
  DetValue d;
  const auto& LU = lu.matrixLU();
  double phase = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index i = 0; i < LU.rows(); ++i) {
    cplx u = LU(i, i);
    double a = std::abs(u);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    d.log_abs += std::log(a);
    if (a > 0) phase += std::arg(u);
  }
  if (lu.permutationP().determinant() < 0) phase += std::numbers::pi;
  d.phase = std::remainder(phase, 2.0 * std::numbers::pi);
  d.pivot_ratio = hi > 0 ? lo / hi : 0.0;
  return d;
}

}  // namespace

DetValue Determinant::evaluate(cplx kappa) const {
  if (trivial()) return {};
  Eigen::MatrixXcd A = M_.evaluate(kappa);
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  return lu_det(lu);
}

DetValue Determinant::evaluate(cplx kappa, cplx& dlog) const {
  if (trivial()) {
    dlog = 0.0;
    return {};
  }
  Eigen::MatrixXcd A = M_.evaluate(kappa);
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  DetValue d = lu_det(lu);
  if (d.pivot_ratio < kSingularPivot)
    dlog = cplx(std::nan(""), std::nan(""));
  else
    dlog = lu.solve(M_.derivative(kappa)).trace();
  return d;
}

DetResult Determinant::value_and_log_derivative(cplx kappa) const {
  if (trivial()) return {1.0, 0.0, false};
  Eigen::MatrixXcd A = M_.evaluate(kappa);
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  DetValue d = lu_det(lu);
  if (d.pivot_ratio < kSingularPivot || d.log_abs < std::log(1e-300))
    return {d.value(), cplx(std::nan(""), std::nan("")), true};
  cplx dlog = lu.solve(M_.derivative(kappa)).trace();
  return {d.value(), dlog, false};
}

DetResult det_value(const CoinField& coin, cplx kappa) {
  return Determinant(coin).value_and_log_derivative(kappa);
}

}  // namespace qwres
