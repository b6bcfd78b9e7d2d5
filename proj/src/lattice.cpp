#include "qwres/lattice.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qwres/errors.hpp"

namespace qwres {

std::string_view name(Chirality c) {
  switch (c) {
    case Chirality::Left: return "left";
    case Chirality::Right: return "right";
    case Chirality::Down: return "down";
    case Chirality::Up: return "up";
  }
  return "?";
}

Chirality parse_chirality(std::string_view s) {
  if (s == "left" || s == "L") return Chirality::Left;
  if (s == "right" || s == "R") return Chirality::Right;
  if (s == "down" || s == "D") return Chirality::Down;
  if (s == "up" || s == "U") return Chirality::Up;
  throw PreconditionError("unknown chirality '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- WalkState

WalkState WalkState::delta(Site x, Chirality c, cplx value) {
  WalkState u;
  u.set(x, c, value);
  return u;
}

cplx WalkState::amplitude(Site x, Chirality c) const {
  auto it = data_.find(x);
  return it == data_.end() ? cplx{} : it->second[index(c)];
}

Amp4 WalkState::at(Site x) const {
  auto it = data_.find(x);
  return it == data_.end() ? Amp4{} : it->second;
}

void WalkState::set(Site x, Chirality c, cplx value) {
  data_[x][index(c)] = value;
}

void WalkState::add(Site x, Chirality c, cplx value) {
  data_[x][index(c)] += value;
}

void WalkState::add(Site x, const Amp4& v) {
  auto& a = data_[x];
  for (int j = 0; j < 4; ++j) a[j] += v[j];
}

double WalkState::norm_squared() const {
  double s = 0.0;
  for (const auto& [x, a] : data_)
    for (const auto& v : a) s += std::norm(v);
  return s;
}

double WalkState::norm() const { return std::sqrt(norm_squared()); }

cplx WalkState::inner(const WalkState& other) const {
  cplx s{};
  const auto& small = data_.size() <= other.data_.size() ? data_ : other.data_;
  for (const auto& [x, a] : small) {
    auto ia = data_.find(x);
    auto ib = other.data_.find(x);
    if (ia == data_.end() || ib == other.data_.end()) continue;
    for (int j = 0; j < 4; ++j) s += ia->second[j] * std::conj(ib->second[j]);
  }
  return s;
}

double WalkState::max_abs_diff(const WalkState& other) const {
  double m = 0.0;
  for (const auto& [x, a] : data_) {
    Amp4 b = other.at(x);
    for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(a[j] - b[j]));
  }
  for (const auto& [x, b] : other.data_) {
    if (data_.count(x)) continue;
    for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(b[j]));
  }
  return m;
}

void WalkState::prune(double tol) {
  for (auto it = data_.begin(); it != data_.end();) {
    bool zero = true;
    for (const auto& v : it->second)
      if (std::abs(v) > tol) zero = false;
    it = zero ? data_.erase(it) : std::next(it);
  }
}

WalkState& WalkState::operator+=(const WalkState& other) {
  for (const auto& [x, a] : other.data_) add(x, a);
  return *this;
}

WalkState& WalkState::operator-=(const WalkState& other) {
  for (const auto& [x, a] : other.data_) {
    auto& d = data_[x];
    for (int j = 0; j < 4; ++j) d[j] -= a[j];
  }
  return *this;
}

WalkState& WalkState::operator*=(cplx s) {
  for (auto& [x, a] : data_)
    for (auto& v : a) v *= s;
  return *this;
}

std::vector<Site> WalkState::support() const {
  std::vector<Site> out;
  out.reserve(data_.size());
  for (const auto& [x, a] : data_) out.push_back(x);
  return out;
}

WalkState operator+(WalkState a, const WalkState& b) { return a += b; }
WalkState operator-(WalkState a, const WalkState& b) { return a -= b; }
WalkState operator*(cplx s, WalkState a) { return a *= s; }

// ---------------------------------------------------------------- CoinField

double unitarity_residual(const Mat4& m) {
  return (m.adjoint() * m - Mat4::Identity()).cwiseAbs().maxCoeff();
}

namespace {
const Mat4& identity4() {
  static const Mat4 id = Mat4::Identity();
  return id;
}
}  // namespace

CoinField::CoinField(int M0, std::map<Site, Mat4> overrides)
    : M0_(M0), overrides_(std::move(overrides)) {
  if (M0_ < 1) throw PreconditionError("coin field needs M0 >= 1");
  for (const auto& [x, m] : overrides_) {
    if (!in_box(x))
      throw PreconditionError("coin override at (" + std::to_string(x.x1) +
                              "," + std::to_string(x.x2) +
                              ") lies outside the box of radius " +
                              std::to_string(M0_));
    if (!m.allFinite() || unitarity_residual(m) > kUnitarityTol)
      throw PreconditionError("coin at (" + std::to_string(x.x1) + "," +
                              std::to_string(x.x2) + ") is not unitary");
  }
}

const Mat4& CoinField::at(Site x) const {
  auto it = overrides_.find(x);
  return it == overrides_.end() ? identity4() : it->second;
}

std::vector<Site> CoinField::active_sites() const {
  std::vector<Site> out;
  for (const auto& [x, m] : overrides_)
    if (m != Mat4::Identity()) out.push_back(x);
  return out;
}

std::vector<Site> CoinField::box_sites() const {
  std::vector<Site> out;
  for (int a = -M0_; a <= M0_; ++a)
    for (int b = -M0_; b <= M0_; ++b) out.push_back({a, b});
  return out;
}

CoinField CoinField::with(Site x, const Mat4& m) const {
  auto o = overrides_;
  o[x] = m;
  return CoinField(M0_, std::move(o));
}

// ------------------------------------------------------------- WalkOperator

WalkState WalkOperator::apply(const WalkState& u) const {
  WalkState out;
  for (const auto& [x, a] : u.sites()) {
    Eigen::Vector4cd v(a[0], a[1], a[2], a[3]);
    if (coin_.is_override(x)) v = coin_.at(x) * v;
    for (Chirality c : kChiralities) {
      cplx z = v[index(c)];
      if (z != cplx{}) out.add(x + step(c), c, z);
    }
  }
  return out;
}

WalkState WalkOperator::apply_adjoint(const WalkState& u) const {
  WalkState moved;
  for (const auto& [x, a] : u.sites())
    for (Chirality c : kChiralities)
      if (a[index(c)] != cplx{}) moved.add(x - step(c), c, a[index(c)]);
  WalkState out;
  for (const auto& [x, a] : moved.sites()) {
    if (!coin_.is_override(x)) {
      out.add(x, a);
      continue;
    }
    Eigen::Vector4cd v(a[0], a[1], a[2], a[3]);
    v = coin_.at(x).adjoint() * v;
    out.add(x, Amp4{v[0], v[1], v[2], v[3]});
  }
  return out;
}

namespace {

// True when an amplitude at x (outside the box) moving along c never
// reaches a site of the box again.
bool escapes(Site x, Chirality c, int M0) {
  switch (c) {
    case Chirality::Left: return !(std::abs(x.x2) <= M0 && x.x1 > M0);
    case Chirality::Right: return !(std::abs(x.x2) <= M0 && x.x1 < -M0);
    case Chirality::Down: return !(std::abs(x.x1) <= M0 && x.x2 > M0);
    case Chirality::Up: return !(std::abs(x.x1) <= M0 && x.x2 < -M0);
  }
  return false;
}

struct Ballistic {
  Site x;
  Chirality c;
  cplx value;
  long emitted;
};

}  // namespace

WalkState WalkOperator::evolve(const WalkState& u, long t) const {
  if (t < 0) throw PreconditionError("evolve needs t >= 0");
  const int M0 = coin_.M0();
  WalkState cur = u;
  std::vector<Ballistic> free;
  for (long s = 0; s < t; ++s) {
    WalkState keep;
    for (const auto& [x, a] : cur.sites()) {
      bool outside = !coin_.in_box(x);
      for (Chirality c : kChiralities) {
        cplx z = a[index(c)];
        if (z == cplx{}) continue;
        if (outside && escapes(x, c, M0))
          free.push_back({x, c, z, s});
        else
          keep.add(x, c, z);
      }
    }
    cur = apply(keep);
  }
  for (const auto& b : free) {
    long n = t - b.emitted;
    Site d = step(b.c);
    cur.add({b.x.x1 + static_cast<int>(n * d.x1),
             b.x.x2 + static_cast<int>(n * d.x2)},
            b.c, b.value);
  }
  return cur;
}

// ------------------------------------------------------------------ helpers

Mat4 random_unitary_coin(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat4 z;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) z(j, k) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat4> qr(z);
  Mat4 q = qr.householderQ();
  Mat4 r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < 4; ++k) {
    double a = std::abs(r(k, k));
    if (a > 0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

Eigen::Vector4cd basis(Chirality c) {
  Eigen::Vector4cd e = Eigen::Vector4cd::Zero();
  e[index(c)] = 1.0;
  return e;
}

Mat4 columns(Chirality c0, Chirality c1, Chirality c2, Chirality c3) {
  Mat4 m;
  m.col(0) = basis(c0);
  m.col(1) = basis(c1);
  m.col(2) = basis(c2);
  m.col(3) = basis(c3);
  return m;
}

}  // namespace qwres
