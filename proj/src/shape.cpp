#include "qwres/shape.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qwres/errors.hpp"
#include "qwres/parallel.hpp"
#include "qwres/presets.hpp"

namespace qwres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using C = Chirality;

cplx entry(const Mat4& m, C row, C col) { return m(index(row), index(col)); }

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

double wrap(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (kTwoPi - r < 1e-13) r = 0.0;
  return r + 0.0;
}

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw PreconditionError("eps must lie in [0, 1]");
}

}  // namespace

// ------------------------------------------------------------ corner family

CornerPreset parse_corner_preset(const std::string& s) {
  if (s == "one-corner") return CornerPreset::OneCorner;
  if (s == "leaky-corner") return CornerPreset::LeakyCorner;
  if (s == "phase-corner") return CornerPreset::PhaseCorner;
  throw PreconditionError("unknown corner preset '" + s + "'");
}

std::string to_string(CornerPreset p) {
  switch (p) {
    case CornerPreset::OneCorner: return "one-corner";
    case CornerPreset::LeakyCorner: return "leaky-corner";
    case CornerPreset::PhaseCorner: return "phase-corner";
  }
  return "?";
}

CoinField CornerFamily::field() const {
  std::map<Site, Mat4> o;
  for (int k = 0; k < 4; ++k) o[corners[k]] = matrices[k];
  return CoinField(M0(), std::move(o));
}

CoinField CornerFamily::unperturbed_field() const {
  std::map<Site, Mat4> o;
  for (int k = 0; k < 4; ++k) o[corners[k]] = unperturbed[k];
  return CoinField(M0(), std::move(o));
}

double CornerFamily::deviation() const {
  double d = 0.0;
  for (int k = 0; k < 4; ++k) d = std::max(d, max_abs(matrices[k] - unperturbed[k]));
  return d;
}

void check_zero_pattern(const CornerFamily& f) {
  struct Z {
    int corner;
    C row, col;
  };
  const std::array<Z, 8> pattern = {{{0, C::Right, C::Left},
                                     {0, C::Up, C::Down},
                                     {1, C::Up, C::Down},
                                     {1, C::Left, C::Right},
                                     {2, C::Down, C::Up},
                                     {2, C::Left, C::Right},
                                     {3, C::Right, C::Left},
                                     {3, C::Down, C::Up}}};
  for (const auto& z : pattern)
    if (entry(f.matrices[z.corner], z.row, z.col) != cplx{})
      throw PreconditionError("corner coin breaks the zero pattern at entry (" +
                              std::string(name(z.row)) + "," + std::string(name(z.col)) + ")");
}

CornerFamily make_corner_family(int m0, int n0, double eps, CornerPreset preset) {
  check_eps(eps);
  PermutationCoin base = corner_permutation(m0, n0);
  CornerFamily f;
  f.m0 = m0;
  f.n0 = n0;
  f.eps = eps;
  f.preset = preset;
  f.corners = {Site{0, 0}, Site{m0, 0}, Site{m0, n0}, Site{0, n0}};
  CoinField el = base.to_coin_field();
  for (int k = 0; k < 4; ++k) f.unperturbed[k] = f.matrices[k] = el.at(f.corners[k]);

  const double a = std::sqrt(1.0 - eps * eps);
  Mat4& c = f.matrices[0];
  switch (preset) {
    case CornerPreset::LeakyCorner:
      c.col(index(C::Down)) = a * basis(C::Right) + eps * basis(C::Left);
      c.col(index(C::Right)) = -eps * basis(C::Right) + a * basis(C::Left);
      [[fallthrough]];
    case CornerPreset::OneCorner:
      c.col(index(C::Left)) = a * basis(C::Up) + eps * basis(C::Down);
      c.col(index(C::Up)) = -eps * basis(C::Up) + a * basis(C::Down);
      break;
    case CornerPreset::PhaseCorner:
      c.col(index(C::Left)) = std::polar(1.0, eps) * basis(C::Up);
      break;
  }
  for (const auto& m : f.matrices)
    if (unitarity_residual(m) > CoinField::kUnitarityTol)
      throw PreconditionError("corner coin is not unitary");
  check_zero_pattern(f);
  if (f.deviation() > eps * (1 + 1e-12))
    throw PreconditionError("corner coin deviates from the elastic coin by more than eps");
  return f;
}

int QuantizationData::eigenvalue_count() const {
  int n = 0;
  if (std::abs(std::abs(c_plus) - 1.0) <= 1e-12) n += N;
  if (std::abs(std::abs(c_minus) - 1.0) <= 1e-12) n += N;
  return n;
}

std::vector<cplx> qc2_roots(cplx c, int N) {
  if (N <= 0) throw PreconditionError("N must be positive");
  std::vector<cplx> out;
  if (c == cplx{}) return out;
  const double lr = std::log(std::abs(c)) / N;
  for (int k = 0; k < N; ++k) {
    double argw = (std::arg(c) + kTwoPi * k) / N;
    out.push_back({wrap(-argw), lr});
  }
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  return out;
}

namespace {

std::vector<PhasePoint> orbit_points(const CornerFamily& fam, int sign) {
  auto res = trace_trajectory(corner_permutation(fam.m0, fam.n0), {0, 0},
                              sign > 0 ? C::Left : C::Down);
  return std::get<ClosedOrbit>(res).cycle;
}

}  // namespace

OutgoingState corner_outgoing_state(const CornerFamily& fam, int sign, cplx kappa) {
  if (sign != 1 && sign != -1) throw PreconditionError("sign must be +1 or -1");
  const CoinField coin = fam.field();
  const int M0 = fam.M0();
  const auto orbit = orbit_points(fam, sign);
  const int N = static_cast<int>(orbit.size());
  const cplx z = std::exp(cplx(0, 1) * kappa);

  WalkState u;
  cplx f = 1.0;
  for (int t = 0; t < N; ++t) {
    const auto& cur = orbit[t];
    const auto& nxt = orbit[(t + 1) % N];
    u.add(cur.q, cur.p, f);
    const Mat4& Cx = coin.at(cur.q);
    for (C k : kChiralities) {
      cplx v = entry(Cx, k, cur.p);
      if (k == nxt.p || v == cplx{}) continue;
      cplx amp = z * v * f;
      Site y = cur.q + step(k);
      for (; chebyshev(y) <= M0; y = y + step(k), amp *= z) {
        if (coin.at(y) != Mat4::Identity())
          throw NumericalError("leak ray meets another perturbed site");
        u.add(y, k, amp);
      }
      u.add(y, k, amp);
    }
    f *= z * entry(Cx, nxt.p, cur.p);
  }
  if (std::abs(f - 1.0) > 1e-9)
    throw PreconditionError("kappa does not satisfy the corner quantization condition");
  return OutgoingState::from_ring(kappa, M0, u);
}

CornerQuantization corner_quantization(const CornerFamily& fam) {
  CornerQuantization q;
  auto& d = q.data;
  const auto& m = fam.matrices;
  d.N = fam.period();
  d.c_plus = entry(m[0], C::Up, C::Left) * entry(m[1], C::Left, C::Down) *
             entry(m[2], C::Down, C::Right) * entry(m[3], C::Right, C::Up);
  d.c_minus = entry(m[0], C::Right, C::Down) * entry(m[1], C::Up, C::Right) *
              entry(m[2], C::Left, C::Up) * entry(m[3], C::Down, C::Left);
  d.kappa_plus = qc2_roots(d.c_plus, d.N);
  d.kappa_minus = qc2_roots(d.c_minus, d.N);
  for (int sign : {1, -1}) {
    cplx c = sign > 0 ? d.c_plus : d.c_minus;
    if (std::abs(std::abs(c) - 1.0) <= 1e-12) continue;
    for (cplx k : sign > 0 ? d.kappa_plus : d.kappa_minus)
      q.states.push_back({sign, k, corner_outgoing_state(fam, sign, k)});
  }
  return q;
}

// ------------------------------------------------------------- shape family

Mat4 weave(const Mat4& c_np, unsigned sides, double eps, WeavePolicy policy) {
  check_eps(eps);
  const double a = std::sqrt(1.0 - eps * eps);
  Mat4 R = Mat4::Identity();
  auto rotate = [&](C p, C q) {
    for (int r = 0; r < 4; ++r)
      if (c_np(r, index(p)) != cplx{} && c_np(r, index(q)) != cplx{})
        throw PreconditionError("boundary coin is incompatible with the weaving pattern: columns " +
                                std::string(name(p)) + " and " + std::string(name(q)) +
                                " overlap");
    R(index(p), index(p)) = a;
    R(index(q), index(p)) = eps;
    R(index(p), index(q)) = -eps;
    R(index(q), index(q)) = a;
  };
  bool horizontal = policy == WeavePolicy::BothAxes || (sides & (kK1Minus | kK1Plus));
  bool vertical = policy == WeavePolicy::BothAxes || (sides & (kK2Minus | kK2Plus));
  if (horizontal) rotate(C::Left, C::Right);
  if (vertical) rotate(C::Down, C::Up);
  return c_np * R;
}

ShapeFamily make_shape_family(const BarrierSpec& spec, double eps, WeavePolicy policy) {
  check_eps(eps);
  CoinField np = spec.coin_field();
  std::map<Site, Mat4> o = np.overrides();
  for (Site x : boundary_sites(spec.M0)) o[x] = weave(np.at(x), boundary_sides(x, spec.M0), eps, policy);
  return ShapeFamily{spec, eps, policy, np, CoinField(spec.M0, std::move(o))};
}

double ShapeFamily::deviation() const {
  double d = 0.0;
  for (Site x : boundary_sites(base.M0)) d = std::max(d, max_abs(coins.at(x) - np.at(x)));
  return d;
}

ConditionCReport condition_c_check(const CoinField& coin, double tol) {
  ConditionCReport rep;
  auto det2 = [](const Mat4& m, C a, C b) {
    return entry(m, a, a) * entry(m, b, b) - entry(m, a, b) * entry(m, b, a);
  };
  for (Site x : coin.box_sites()) {
    const Mat4& m = coin.at(x);
    SiteCondition s{x, det2(m, C::Left, C::Down), det2(m, C::Right, C::Up),
                    det2(m, C::Left, C::Up), det2(m, C::Right, C::Down)};
    if (std::abs(s.det_left_down) <= tol || std::abs(s.det_right_up) <= tol) {
      rep.clause1 = false;
      rep.clause1_failures.push_back(x);
    }
    if (std::abs(s.det_left_up) <= tol || std::abs(s.det_right_down) <= tol) {
      rep.clause2 = false;
      rep.clause2_failures.push_back(x);
    }
    rep.sites.push_back(s);
  }
  return rep;
}

// ------------------------------------------------------------------- scans

namespace {
constexpr double kUnperturbedHalfWidth = 1e-3;

double half_width(double eps, double s) { return eps > 0 ? std::pow(eps, s) : kUnperturbedHalfWidth; }
}  // namespace

std::vector<ScanRow> migration_scan(const std::function<CoinField(double)>& family,
                                    const std::vector<double>& eps_grid,
                                    const std::vector<double>& mu0_list, double s, double tol) {
  if (!(s > 0)) throw PreconditionError("s must be positive");
  for (double eps : eps_grid) {
    check_eps(eps);
    double h = half_width(eps, s);
    if (h >= std::numbers::pi)
      throw PreconditionError("loops wider than half a period");
    for (std::size_t i = 0; i < mu0_list.size(); ++i)
      for (std::size_t j = i + 1; j < mu0_list.size(); ++j)
        if (std::abs(std::remainder(mu0_list[i] - mu0_list[j], kTwoPi)) <= 2 * h)
          throw PreconditionError("loops around neighbouring mu0 overlap at eps = " +
                                  std::to_string(eps));
  }
  const std::size_t nm = mu0_list.size();
  std::vector<std::vector<ScanRow>> cells(eps_grid.size() * nm);
  std::vector<CoinField> coins;
  for (double eps : eps_grid) coins.push_back(family(eps));
  parallel_for(cells.size(), [&](std::size_t idx) {
    const std::size_t ie = idx / nm, im = idx % nm;
    const double eps = eps_grid[ie], mu0 = mu0_list[im];
    const double h = half_width(eps, s);
    Rect loop{mu0 - h, mu0 + h, -h, h};
    RootOptions opt;
    opt.tol = tol;
    opt.normalize = false;
    RootSearch rs = locate_roots(coins[ie], loop, opt);
    auto& rows = cells[idx];
    if (rs.roots.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rows.push_back({eps, mu0, 0, cplx(nan, nan), nan, nan});
      return;
    }
    for (const auto& r : rs.roots)
      for (int k = 0; k < r.multiplicity; ++k)
        rows.push_back({eps, mu0, rs.winding_total, r.kappa, std::abs(r.w()),
                        std::abs(r.kappa - cplx(mu0, 0.0))});
  });
  std::vector<ScanRow> out;
  for (auto& c : cells) out.insert(out.end(), c.begin(), c.end());
  return out;
}

// ------------------------------------------------------ perturbation checks

WalkState apply_coin_difference(const ShapeFamily& fam, const WalkState& h) {
  WalkState q;
  for (Site x : boundary_sites(fam.base.M0)) {
    Mat4 d = fam.np.at(x) - fam.coins.at(x);
    Amp4 a = h.at(x);
    Eigen::Vector4cd v = d * Eigen::Vector4cd(a[0], a[1], a[2], a[3]);
    for (C k : kChiralities)
      if (v[index(k)] != cplx{}) q.add(x + step(k), k, v[index(k)]);
  }
  return q;
}

IdentityReport perturbation_identities(const ShapeFamily& fam, cplx kappa, cplx theta,
                                       const WalkState& f, const WalkState& g) {
  const WalkState ft = apply_T_theta(-theta, f);
  const WalkState gt = apply_T_theta(-std::conj(theta), g);
  ContinuedResolvent r_np(fam.np, kappa);
  ContinuedResolvent r_eps(fam.coins, kappa);
  const std::vector<Site> K = boundary_sites(fam.base.M0);

  IdentityReport rep;
  rep.direct = r_eps.element(ft, gt) - r_np.element(ft, gt);
  rep.eps_np = r_eps.element(apply_coin_difference(fam, r_np.apply(ft, K)), gt);
  rep.np_eps = r_np.element(apply_coin_difference(fam, r_eps.apply(ft, K)), gt);
  rep.residual_eps_np = std::abs(rep.eps_np - rep.direct);
  rep.residual_np_eps = std::abs(rep.np_eps - rep.direct);
  return rep;
}

cplx projection_difference(const ShapeFamily& fam, double mu0, double s, const WalkState& f,
                           const WalkState& g) {
  if (fam.eps == 0.0) return 0.0;
  Rect loop = Rect::loop({mu0, 0.0}, fam.eps, s);
  return projection_element(fam.coins, mu0, loop, f, g) -
         projection_element(fam.np, mu0, loop, f, g);
}

}  // namespace qwres
