#include "qwres/barrier.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "qwres/errors.hpp"
#include "qwres/spectral.hpp"
#include "qwres/translation.hpp"

namespace qwres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPinTol = 1e-12;

std::string site_str(Site x) {
  return "(" + std::to_string(x.x1) + "," + std::to_string(x.x2) + ")";
}

struct Pin {
  unsigned side;
  Chirality row;
  Chirality one;
};

constexpr std::array<Pin, 4> kPins = {{{kK1Minus, Chirality::Left, Chirality::Right},
                                       {kK1Plus, Chirality::Right, Chirality::Left},
                                       {kK2Minus, Chirality::Down, Chirality::Up},
                                       {kK2Plus, Chirality::Up, Chirality::Down}}};

}  // namespace

unsigned boundary_sides(Site x, int M0) {
  if (chebyshev(x) != M0) return kNoSide;
  unsigned s = kNoSide;
  if (x.x1 == -M0) s |= kK1Minus;
  if (x.x1 == M0) s |= kK1Plus;
  if (x.x2 == -M0) s |= kK2Minus;
  if (x.x2 == M0) s |= kK2Plus;
  return s;
}

std::vector<Site> boundary_sites(int M0) {
  std::vector<Site> out;
  for (int a = -M0; a <= M0; ++a)
    for (int b = -M0; b <= M0; ++b)
      if (boundary_sides({a, b}, M0) != kNoSide) out.push_back({a, b});
  return out;
}

void check_pinned_rows(const Mat4& c, unsigned sides, Site x) {
  for (const auto& p : kPins) {
    if (!(sides & p.side)) continue;
    for (Chirality k : kChiralities) {
      cplx want = k == p.one ? 1.0 : 0.0;
      if (std::abs(c(index(p.row), index(k)) - want) > kPinTol)
        throw PreconditionError("boundary coin at " + site_str(x) + ": row " +
                                std::string(name(p.row)) + " must be e_" +
                                std::string(name(p.one)) + "^T");
    }
  }
}

Mat4 trivial_boundary_coin() {
  Mat4 m = Mat4::Zero();
  m(0, 1) = m(1, 0) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

void BarrierSpec::validate() const {
  if (M0 < 1) throw PreconditionError("barrier needs M0 >= 1");
  for (const auto& [x, m] : interior)
    if (chebyshev(x) >= M0)
      throw PreconditionError("interior coin at " + site_str(x) + " is not inside the box minus K");
  for (const auto& [x, m] : boundary) {
    unsigned s = boundary_sides(x, M0);
    if (s == kNoSide) throw PreconditionError("boundary coin at " + site_str(x) + " is not on K");
    if (unitarity_residual(m) > CoinField::kUnitarityTol)
      throw PreconditionError("boundary coin at " + site_str(x) + " is not unitary");
    check_pinned_rows(m, s, x);
  }
}

CoinField BarrierSpec::coin_field() const {
  validate();
  std::map<Site, Mat4> o = interior;
  for (Site x : boundary_sites(M0)) {
    auto it = boundary.find(x);
    o[x] = it == boundary.end() ? trivial_boundary_coin() : it->second;
  }
  return CoinField(M0, std::move(o));
}

BarrierSpec trivial_barrier(int M0) {
  BarrierSpec s;
  s.M0 = M0;
  for (Site x : boundary_sites(M0)) s.boundary[x] = trivial_boundary_coin();
  s.validate();
  return s;
}

BarrierSpec random_interior_barrier(int M0, std::uint64_t seed) {
  BarrierSpec s = trivial_barrier(M0);
  std::uint64_t k = 0;
  for (int a = -M0 + 1; a <= M0 - 1; ++a)
    for (int b = -M0 + 1; b <= M0 - 1; ++b)
      s.interior[{a, b}] = random_unitary_coin(seed * 7919ULL + k++);
  s.interior_label = "random:" + std::to_string(seed);
  s.validate();
  return s;
}

// ------------------------------------------------------------ InteriorGraph

InteriorGraph::InteriorGraph(int M0_) : M0(M0_) {
  if (M0 < 1) throw PreconditionError("interior graph needs M0 >= 1");
  for (int a = -M0; a <= M0; ++a)
    for (int b = -M0; b <= M0; ++b)
      for (Chirality j : kChiralities) {
        Site from = Site{a, b} - step(j);
        if (chebyshev(from) > M0) continue;
        index[{{a, b}, j}] = static_cast<int>(states.size());
        states.push_back({{a, b}, j});
      }
}

std::pair<Site, Site> InteriorGraph::edge(int k) const {
  const auto& s = states.at(k);
  return {s.q - step(s.p), s.q};
}

Eigen::VectorXcd InteriorGraph::restrict(const WalkState& u) const {
  Eigen::VectorXcd v(N());
  for (int k = 0; k < N(); ++k) v[k] = u.amplitude(states[k].q, states[k].p);
  return v;
}

WalkState InteriorGraph::embed(const Eigen::VectorXcd& v) const {
  if (v.size() != N()) throw PreconditionError("interior vector has the wrong length");
  WalkState u;
  for (int k = 0; k < N(); ++k) u.set(states[k].q, states[k].p, v[k]);
  return u;
}

Eigen::VectorXcd InteriorGraph::weights(cplx theta) const {
  Eigen::VectorXcd w(N());
  for (int k = 0; k < N(); ++k) w[k] = translation_weight(states[k].p, states[k].q, theta);
  return w;
}

// ------------------------------------------------------------- splitting

namespace {

bool is_interior(const InteriorGraph& g, Site x, Chirality j) { return g.contains(x, j); }

double leak_from(const CoinField& coin, const InteriorGraph& g, Site x, Chirality j, bool interior) {
  const Mat4& C = coin.at(x);
  double leak = 0.0;
  for (Chirality k : kChiralities) {
    cplx v = C(index(k), index(j));
    if (v == cplx{}) continue;
    if (is_interior(g, x + step(k), k) != interior) leak += std::norm(v);
  }
  return std::sqrt(leak);
}

// Follows an exterior amplitude; the exterior walk is elastic, so each step
// maps one basis state to one basis state.
bool exterior_escapes(const CoinField& coin, PhasePoint start) {
  const int M0 = coin.M0();
  PhasePoint cur = start;
  std::set<PhasePoint> seen;
  for (int t = 0; t < 64 * (2 * M0 + 5) * (2 * M0 + 5); ++t) {
    if (!seen.insert(cur).second) return false;
    bool outside = chebyshev(cur.q) > M0;
    Site x = cur.q;
    bool heads_in = false;
    switch (cur.p) {
      case Chirality::Left: heads_in = std::abs(x.x2) <= M0 && x.x1 > M0; break;
      case Chirality::Right: heads_in = std::abs(x.x2) <= M0 && x.x1 < -M0; break;
      case Chirality::Down: heads_in = std::abs(x.x1) <= M0 && x.x2 > M0; break;
      case Chirality::Up: heads_in = std::abs(x.x1) <= M0 && x.x2 < -M0; break;
    }
    if (outside && !heads_in) return true;
    const Mat4& C = coin.at(cur.q);
    int out = -1;
    for (int k = 0; k < 4; ++k) {
      double a = std::abs(C(k, index(cur.p)));
      if (a <= 1e-12) continue;
      if (out >= 0 || std::abs(a - 1.0) > 1e-12)
        throw NumericalError("exterior walk is not elastic at " + site_str(cur.q));
      out = k;
    }
    Chirality c = chirality(out);
    cur = {cur.q + step(c), c};
  }
  throw NumericalError("exterior trajectory did not terminate");
}

}  // namespace

NonPenetrable build_nonpenetrable(const BarrierSpec& spec) {
  NonPenetrable np{spec.coin_field(), InteriorGraph(spec.M0), {}, 0.0};
  const int M0 = spec.M0;
  for (const auto& s : np.graph.states)
    np.leakage = std::max(np.leakage, leak_from(np.coin, np.graph, s.q, s.p, true));
  for (int a = -M0 - 2; a <= M0 + 2; ++a)
    for (int b = -M0 - 2; b <= M0 + 2; ++b)
      for (Chirality j : kChiralities) {
        Site x{a, b};
        if (is_interior(np.graph, x, j)) continue;
        np.leakage = std::max(np.leakage, leak_from(np.coin, np.graph, x, j, false));
        if (chebyshev(x) <= M0) np.exterior.boundary_inputs.push_back({x, j});
        ++np.exterior.starts_traced;
        if (!exterior_escapes(np.coin, {x, j})) np.exterior.non_trapping = false;
      }
  return np;
}

// ------------------------------------------------------- interior spectrum

Eigen::MatrixXcd interior_matrix(const InteriorGraph& g, const CoinField& coin) {
  const int N = g.N();
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(N, N);
  for (int s = 0; s < N; ++s) {
    const auto& st = g.states[s];
    const Mat4& C = coin.at(st.q);
    for (Chirality k : kChiralities) {
      cplx v = C(index(k), index(st.p));
      if (v == cplx{}) continue;
      auto it = g.index.find({st.q + step(k), k});
      if (it != g.index.end()) U(it->second, s) += v;
    }
  }
  return U;
}

InteriorUnitary interior_spectrum(const InteriorGraph& g, const CoinField& coin) {
  InteriorUnitary iu;
  iu.graph = g;
  iu.U = interior_matrix(g, coin);
  const int N = g.N();
  iu.unitarity_residual =
      (iu.U.adjoint() * iu.U - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
  if (iu.unitarity_residual > 1e-10)
    throw NumericalError("interior walk is not unitary; boundary leaks");

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(iu.U);
  if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
  const Eigen::MatrixXcd& T = schur.matrixT();
  iu.vectors = schur.matrixU();
  iu.eigenvalues = T.diagonal();
  Eigen::MatrixXcd off = T;
  off.diagonal().setZero();
  double offnorm = off.cwiseAbs().maxCoeff();
  iu.phases.resize(N);
  for (int j = 0; j < N; ++j) {
    double p = std::fmod(-std::arg(iu.eigenvalues[j]), kTwoPi);
    if (p < 0) p += kTwoPi;
    if (kTwoPi - p < 1e-12 || p == 0.0) p = 0.0;
    iu.phases[j] = p;
    iu.modulus_residual = std::max(iu.modulus_residual, std::abs(std::abs(iu.eigenvalues[j]) - 1.0));
  }
  iu.gram_residual =
      (iu.vectors.adjoint() * iu.vectors - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
  iu.eigen_residual =
      (iu.U * iu.vectors - iu.vectors * iu.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff();
  if (offnorm > 1e-8 || iu.eigen_residual > 1e-10 || iu.modulus_residual > 1e-10)
    throw NumericalError("interior eigen-decomposition residual above tolerance");
  return iu;
}

std::vector<std::pair<double, int>> InteriorUnitary::multiplicities(double tol) const {
  std::vector<double> p(phases.data(), phases.data() + phases.size());
  std::sort(p.begin(), p.end());
  std::vector<std::pair<double, int>> out;
  for (double v : p) {
    if (!out.empty() && v - out.back().first <= tol) {
      ++out.back().second;
      continue;
    }
    out.push_back({v, 1});
  }
  // 0 and 2 pi are the same phase
  if (out.size() > 1 && kTwoPi - out.back().first <= tol) {
    out.front().second += out.back().second;
    out.pop_back();
  }
  return out;
}

Eigen::VectorXcd green_apply(const InteriorUnitary& iu, cplx kappa, const Eigen::VectorXcd& f,
                             cplx theta) {
  const int N = iu.graph.N();
  if (f.size() != N) throw PreconditionError("interior vector has the wrong length");
  const cplx w = std::exp(cplx(0, -1) * kappa);
  Eigen::VectorXcd denom(N);
  for (int j = 0; j < N; ++j) {
    denom[j] = iu.eigenvalues[j] - w;
    if (std::abs(denom[j]) <= 1e-12)
      throw PreconditionError("e^{-i kappa} is an eigenvalue of the interior walk");
  }
  Eigen::VectorXcd tf = f;
  Eigen::VectorXcd wt;
  if (theta != cplx{}) {
    wt = iu.graph.weights(theta);
    tf = f.cwiseQuotient(wt);
  }
  Eigen::VectorXcd coef = (iu.vectors.adjoint() * tf).cwiseQuotient(denom);
  Eigen::VectorXcd u = iu.vectors * coef;
  if (theta != cplx{}) u = u.cwiseProduct(wt);
  return u;
}

double norm_on_loop(const InteriorUnitary& iu, double mu0, double eps, double s, double a,
                    double b, int samples) {
  if (!(eps > 0) || !(s > 0) || !(a > 0) || !(b > 0))
    throw PreconditionError("loop needs eps, s, a, b > 0");
  if (samples < 64) throw PreconditionError("loop needs at least 64 samples");
  const double r = std::pow(eps, s);
  for (int j = 0; j < iu.phases.size(); ++j) {
    double d = std::abs(std::remainder(iu.phases[j] - mu0, kTwoPi));
    if (d > 1e-8 && d <= a * r)
      throw PreconditionError("another eigen-phase lies inside the loop");
  }
  Rect loop = Rect::loop({mu0, 0.0}, eps, s, a, b);
  std::array<cplx, 5> corner = {cplx(loop.re_lo, loop.im_lo), cplx(loop.re_hi, loop.im_lo),
                                cplx(loop.re_hi, loop.im_hi), cplx(loop.re_lo, loop.im_hi),
                                cplx(loop.re_lo, loop.im_lo)};
  const int per_edge = (samples + 3) / 4;
  const int N = iu.graph.N();
  double best = 0.0;
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < per_edge; ++i) {
      cplx k = corner[e] + (corner[e + 1] - corner[e]) * (double(i) / per_edge);
      Eigen::MatrixXcd A = iu.U - std::exp(cplx(0, -1) * k) * Eigen::MatrixXcd::Identity(N, N);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
      double smin = svd.singularValues()[N - 1];
      best = std::max(best, 1.0 / smin);
    }
  return best;
}

}  // namespace qwres
