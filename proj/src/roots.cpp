#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qwres/errors.hpp"
#include "qwres/spectral.hpp"

namespace qwres {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryPivot = 1e-12;

std::string str(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
  return os.str();
}

bool lex_less(cplx a, cplx b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

bool Rect::contains(cplx z, double margin) const {
  return z.real() >= re_lo - margin && z.real() <= re_hi + margin &&
         z.imag() >= im_lo - margin && z.imag() <= im_hi + margin;
}

Rect Rect::loop(cplx mu0, double eps, double s, double a, double b) {
  double r = std::pow(eps, s);
  return {mu0.real() - a * r, mu0.real() + a * r, mu0.imag() - b * r, mu0.imag() + b * r};
}

Rect fundamental_strip(double depth, double top, double offset) {
  return {offset, offset + kTwoPi, -depth, top};
}

cplx Root::w() const { return std::exp(cplx(0, -1) * kappa); }

BoundaryZero::BoundaryZero(cplx z)
    : NumericalError("determinant vanishes on the contour near " + str(z)), where(z) {}

// ---------------------------------------------------------- WindingCounter

WindingCounter::WindingCounter(const Determinant& det, double step) : det_(det), step_(step) {}

WindingCounter::Sample WindingCounter::sample(cplx z) {
  auto key = std::make_pair(z.real(), z.imag());
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ++evaluations_;
  cplx dlog;
  DetValue d = det_.evaluate(z, dlog);
  if (d.pivot_ratio < kBoundaryPivot || !std::isfinite(d.phase) || !std::isfinite(std::abs(dlog)))
    throw BoundaryZero(z);
  Sample s{d.phase, std::abs(dlog)};
  cache_.emplace(key, s);
  return s;
}

double WindingCounter::refine(cplx a, Sample fa, cplx b, Sample fb, int depth) {
  double d = std::remainder(fb.phase - fa.phase, kTwoPi);
  double h = std::abs(b - a);
  if (std::abs(d) < kPi / 4 && h * std::max(fa.rate, fb.rate) < kPi / 4) return d;
  if (depth > 60) throw NumericalError("argument of D could not be resolved near " + str(a));
  cplx m = 0.5 * (a + b);
  Sample fm = sample(m);
  return refine(a, fa, m, fm, depth + 1) + refine(m, fm, b, fb, depth + 1);
}

double WindingCounter::edge(cplx a, cplx b) {
  if (lex_less(b, a)) return -edge(b, a);
  std::array<double, 4> key{a.real(), a.imag(), b.real(), b.imag()};
  auto it = edge_cache_.find(key);
  if (it != edge_cache_.end()) return it->second;
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / step_)));
  double total = 0.0;
  cplx p = a;
  Sample fp = sample(p);
  for (int i = 1; i <= n; ++i) {
    cplx q = i == n ? b : a + (b - a) * (double(i) / n);
    Sample fq = sample(q);
    total += refine(p, fp, q, fq, 0);
    p = q;
    fp = fq;
  }
  edge_cache_.emplace(key, total);
  return total;
}

int WindingCounter::winding(const Rect& r) {
  if (det_.trivial()) return 0;
  cplx c00(r.re_lo, r.im_lo), c10(r.re_hi, r.im_lo), c11(r.re_hi, r.im_hi), c01(r.re_lo, r.im_hi);
  double total = edge(c00, c10) + edge(c10, c11) + edge(c11, c01) + edge(c01, c00);
  double w = total / kTwoPi;
  double k = std::round(w);
  if (std::abs(w - k) > 1e-6)
    throw NumericalError("non-integer winding " + std::to_string(w));
  return static_cast<int>(k);
}

int winding_number(const CoinField& coin, const Rect& r) {
  Determinant det(coin);
  WindingCounter wc(det);
  return wc.winding(r);
}

// ---------------------------------------------------------- quadrature

namespace {

cplx romberg(const std::function<cplx(cplx)>& F, cplx a, cplx b, double tol) {
  constexpr int kMin = 4, kMax = 18;
  const cplx h = b - a;
  std::vector<cplx> prev, cur;
  cplx trap = 0.5 * h * (F(a) + F(b));
  prev.push_back(trap);
  for (int k = 1; k <= kMax; ++k) {
    const long n = 1L << (k - 1);
    cplx sum{};
    for (long i = 0; i < n; ++i) sum += F(a + h * ((2.0 * i + 1.0) / (2.0 * n)));
    trap = 0.5 * trap + h * sum / (2.0 * n);
    cur.assign(k + 1, cplx{});
    cur[0] = trap;
    double f = 1.0;
    for (int j = 1; j <= k; ++j) {
      f *= 4.0;
      cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (f - 1.0);
    }
    if (k >= kMin && std::abs(cur[k] - prev[k - 1]) < tol) return cur[k];
    prev.swap(cur);
  }
  throw NumericalError("contour quadrature did not converge");
}

}  // namespace

cplx contour_integral(const std::function<cplx(cplx)>& F, const Rect& r, double tol) {
  cplx c00(r.re_lo, r.im_lo), c10(r.re_hi, r.im_lo), c11(r.re_hi, r.im_hi), c01(r.re_lo, r.im_hi);
  double t = tol / 4;
  return romberg(F, c00, c10, t) + romberg(F, c10, c11, t) + romberg(F, c11, c01, t) +
         romberg(F, c01, c00, t);
}

// ---------------------------------------------------------- root search

namespace {

constexpr std::array<std::pair<double, double>, 5> kSplits = {{
    {0.5, 0.5}, {0.5 + 0.0618, 0.5 - 0.0382}, {0.5 - 0.0853, 0.5 + 0.0731},
    {0.5 + 0.1273, 0.5 + 0.1129}, {0.5 - 0.1511, 0.5 - 0.1347}}};

class Solver {
 public:
  Solver(const Determinant& det, const RootOptions& opt) : det_(det), wc_(det), opt_(opt) {}

  int winding(const Rect& r) { return wc_.winding(r); }

  void solve(const Rect& r, int w, int depth) {
    if (w == 0) return;
    if (w < 0) throw NumericalError("negative winding inside a rectangle");
    if (depth > 200) throw NumericalError("root subdivision too deep");
    if (w == 1) {
      cplx z;
      if (newton(r.center(), r, 1, z)) {
        out_.push_back({z, 1});
        return;
      }
    }
    if (r.size() <= opt_.tol) {
      cplx z = cluster_mean(r, w);
      cplx p;
      if (newton(z, r, w, p)) z = p;
      out_.push_back({z, w});
      return;
    }
    for (auto [fx, fy] : kSplits) {
      double xm = r.re_lo + fx * r.width();
      double ym = r.im_lo + fy * r.height();
      std::array<Rect, 4> kids = {{{r.re_lo, xm, r.im_lo, ym},
                                   {xm, r.re_hi, r.im_lo, ym},
                                   {r.re_lo, xm, ym, r.im_hi},
                                   {xm, r.re_hi, ym, r.im_hi}}};
      std::array<int, 4> wk{};
      try {
        for (int i = 0; i < 4; ++i) wk[i] = wc_.winding(kids[i]);
      } catch (const BoundaryZero&) {
        continue;
      }
      if (wk[0] + wk[1] + wk[2] + wk[3] != w) continue;
      for (int i = 0; i < 4; ++i) solve(kids[i], wk[i], depth + 1);
      return;
    }
    throw NumericalError("could not split rectangle of size " + std::to_string(r.size()));
  }

  const std::vector<std::pair<cplx, int>>& found() const { return out_; }

 private:
  // Multiplicity-weighted Newton on D'/D; succeeds only when it converges
  // inside r.
  bool newton(cplx start, const Rect& r, int mult, cplx& z) {
    z = start;
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
      DetResult d = det_.value_and_log_derivative(z);
      if (d.singular) break;
      cplx dz = double(mult) / d.dlogD;
      if (!std::isfinite(dz.real()) || !std::isfinite(dz.imag())) return false;
      z -= dz;
      last = std::abs(dz);
      if (!r.contains(z, 4 * r.size())) return false;
      if (last <= 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    if (last > 1e-10 * std::max(1.0, std::abs(z)) && !det_.value_and_log_derivative(z).singular)
      return false;
    return r.contains(z, 1e-12 * std::max(1.0, r.size()));
  }

  // Mean of the w zeros in r from the first contour moment. The contour is
  // an enlarged copy of r with the same winding when one exists, which keeps
  // the zeros away from the quadrature nodes.
  cplx cluster_mean(const Rect& r, int w) {
    const cplx c = r.center();
    auto dlog = [&](cplx k) {
      DetResult d = det_.value_and_log_derivative(k);
      if (d.singular) throw BoundaryZero(k);
      return d.dlogD;
    };
    std::vector<Rect> contours;
    for (double grow : {3.0, 2.0, 1.5}) {
      double hw = 0.5 * grow * r.width(), hh = 0.5 * grow * r.height();
      Rect big{c.real() - hw, c.real() + hw, c.imag() - hh, c.imag() + hh};
      try {
        if (wc_.winding(big) == w) contours.push_back(big);
      } catch (const NumericalError&) {
      }
    }
    contours.push_back(r);
    for (std::size_t i = 0; i < contours.size(); ++i) {
      const Rect& q = contours[i];
      try {
        cplx s1 = contour_integral([&](cplx k) { return (k - c) * dlog(k); }, q, 1e-9 * q.size()) /
                  cplx(0, kTwoPi);
        return c + s1 / double(w);
      } catch (const NumericalError&) {
        if (i + 1 == contours.size()) throw;
      }
    }
    return c;
  }

  const Determinant& det_;
  WindingCounter wc_;
  RootOptions opt_;
  std::vector<std::pair<cplx, int>> out_;
};

}  // namespace

RootSearch locate_roots(const CoinField& coin, const Rect& region, const RootOptions& opt) {
  if (!(region.width() > 0) || !(region.height() > 0))
    throw PreconditionError("search region must have positive width and height");
  if (region.width() > kTwoPi * (1 + 1e-12))
    throw PreconditionError("search region wider than one period of Re kappa");
  if (region.im_hi > 1.0 || region.im_lo < -50.0)
    throw PreconditionError("search region must satisfy -50 <= Im kappa <= 1");
  if (!(opt.tol > 0)) throw PreconditionError("tol must be positive");

  RootSearch res;
  res.region = region;
  Determinant det(coin);
  if (det.trivial()) return res;

  Solver solver(det, opt);
  Rect r = region;
  double shift = std::max(opt.tol, 1e-9);
  int total = 0;
  for (int attempt = 0;; ++attempt) {
    try {
      total = solver.winding(r);
      break;
    } catch (const BoundaryZero& bz) {
      if (attempt >= 6) throw;
      double d = shift * (attempt + 1);
      cplx p = bz.where;
      double dv = std::min(std::abs(p.real() - r.re_lo), std::abs(p.real() - r.re_hi));
      double dh = std::min(std::abs(p.imag() - r.im_lo), std::abs(p.imag() - r.im_hi));
      bool vertical = dv <= dh;
      if (vertical) {
        r.re_lo += d;
        r.re_hi += d;
      } else if (std::abs(p.imag() - r.im_lo) < std::abs(p.imag() - r.im_hi)) {
        r.im_lo -= d;
      } else {
        r.im_hi += d;
      }
    }
  }
  res.region = r;
  res.winding_total = total;
  solver.solve(r, total, 0);

  for (auto [z, m] : solver.found()) {
    Root root;
    root.multiplicity = m;
    if (opt.normalize) {
      double re = std::fmod(z.real(), kTwoPi);
      if (re < 0) re += kTwoPi;
      if (kTwoPi - re < 1e-10) re = 0.0;
      z = {re, z.imag()};
    }
    if (std::abs(z.imag()) <= opt.real_axis_tol) {
      z = {z.real(), 0.0};
      root.kind = RootKind::Eigenvalue;
    } else {
      root.kind = RootKind::Resonance;
    }
    root.kappa = z;
    root.residual = std::abs(det.evaluate(z).value());
    res.roots.push_back(root);
  }
  std::sort(res.roots.begin(), res.roots.end(), [](const Root& a, const Root& b) {
    return lex_less(a.kappa, b.kappa);
  });
  int sum = 0;
  for (const auto& rt : res.roots) sum += rt.multiplicity;
  if (sum != total) throw NumericalError("root multiplicities do not add up to the winding");
  return res;
}

RootSearch locate_roots(const CoinField& coin, const Rect& region, double tol) {
  RootOptions opt;
  opt.tol = tol;
  return locate_roots(coin, region, opt);
}

}  // namespace qwres
