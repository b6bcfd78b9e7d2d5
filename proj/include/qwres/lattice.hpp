#pragma once

#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qwres {

using cplx = std::complex<double>;
using Mat4 = Eigen::Matrix4cd;

/// Chirality components in storage order ←, →, ↓, ↑.
enum class Chirality : int { Left = 0, Right = 1, Down = 2, Up = 3 };

inline constexpr std::array<Chirality, 4> kChiralities = {
    Chirality::Left, Chirality::Right, Chirality::Down, Chirality::Up};

constexpr int index(Chirality c) { return static_cast<int>(c); }
constexpr Chirality chirality(int i) { return static_cast<Chirality>(i); }

/// Short lowercase name: "left", "right", "down", "up".
std::string_view name(Chirality c);
/// Inverse of name(); also accepts "L", "R", "D", "U". Throws PreconditionError.
Chirality parse_chirality(std::string_view s);
/// Reversed direction (← ↔ →, ↓ ↔ ↑).
constexpr Chirality opposite(Chirality c) {
  return chirality(index(c) ^ 1);
}

struct Site {
  int x1 = 0;
  int x2 = 0;

  auto operator<=>(const Site&) const = default;
  Site operator+(const Site& o) const { return {x1 + o.x1, x2 + o.x2}; }
  Site operator-(const Site& o) const { return {x1 - o.x1, x2 - o.x2}; }
};

/// Lattice displacement of one shift step for component c.
constexpr Site step(Chirality c) {
  switch (c) {
    case Chirality::Left: return {-1, 0};
    case Chirality::Right: return {1, 0};
    case Chirality::Down: return {0, -1};
    case Chirality::Up: return {0, 1};
  }
  return {0, 0};
}

constexpr int chebyshev(Site x) {
  int a = x.x1 < 0 ? -x.x1 : x.x1;
  int b = x.x2 < 0 ? -x.x2 : x.x2;
  return a > b ? a : b;
}

using Amp4 = std::array<cplx, 4>;

/// Finitely supported C^4-valued sequence on Z^2.
class WalkState {
 public:
  WalkState() = default;

  static WalkState delta(Site x, Chirality c, cplx value = 1.0);

  cplx amplitude(Site x, Chirality c) const;
  Amp4 at(Site x) const;
  void set(Site x, Chirality c, cplx value);
  void add(Site x, Chirality c, cplx value);
  void add(Site x, const Amp4& v);

  double norm_squared() const;
  double norm() const;
  /// Inner product linear in *this, antilinear in other: sum u_j(x) conj(v_j(x)).
  cplx inner(const WalkState& other) const;
  /// Largest componentwise difference |u - v|.
  double max_abs_diff(const WalkState& other) const;

  /// Drops sites whose four amplitudes are all exactly zero (or below tol).
  void prune(double tol = 0.0);

  WalkState& operator+=(const WalkState& other);
  WalkState& operator-=(const WalkState& other);
  WalkState& operator*=(cplx a);

  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }
  const std::map<Site, Amp4>& sites() const { return data_; }
  std::vector<Site> support() const;

 private:
  std::map<Site, Amp4> data_;
};

WalkState operator+(WalkState a, const WalkState& b);
WalkState operator-(WalkState a, const WalkState& b);
WalkState operator*(cplx s, WalkState a);

/// Coins on Z^2: unitary overrides inside the box |x1|, |x2| <= M0, identity elsewhere.
class CoinField {
 public:
  static constexpr double kUnitarityTol = 1e-12;

  explicit CoinField(int M0 = 1, std::map<Site, Mat4> overrides = {});

  int M0() const { return M0_; }
  bool in_box(Site x) const { return chebyshev(x) <= M0_; }
  const Mat4& at(Site x) const;
  bool is_override(Site x) const { return overrides_.count(x) != 0; }
  const std::map<Site, Mat4>& overrides() const { return overrides_; }
  /// Override sites with C(x) != I, in site order.
  std::vector<Site> active_sites() const;
  /// All sites of the box, in site order.
  std::vector<Site> box_sites() const;

  /// Returns a copy with C(x) replaced (validated).
  CoinField with(Site x, const Mat4& m) const;

 private:
  int M0_;
  std::map<Site, Mat4> overrides_;
};

/// max |M^* M - I| entrywise.
double unitarity_residual(const Mat4& m);

/// Position-space U = S C.
class WalkOperator {
 public:
  explicit WalkOperator(CoinField coin) : coin_(std::move(coin)) {}

  const CoinField& coin() const { return coin_; }
  /// Radius of the support of V = U - U_0 (the box dilated by one step).
  int perturbation_radius() const { return coin_.M0() + 1; }

  WalkState apply(const WalkState& u) const;
  WalkState apply_adjoint(const WalkState& u) const;
  WalkState evolve(const WalkState& u, long t) const;

 private:
  CoinField coin_;
};

inline WalkState apply_walk(const WalkOperator& op, const WalkState& u) {
  return op.apply(u);
}
inline WalkState evolve(const WalkOperator& op, const WalkState& u, long t) {
  return op.evolve(u, t);
}

/// Haar-distributed 4x4 unitary, deterministic in the seed.
Mat4 random_unitary_coin(std::uint64_t seed);

/// Basis column e_c as a 4-vector.
Eigen::Vector4cd basis(Chirality c);
/// Matrix whose k-th column is cols[k] (the [e_a, e_b, e_c, e_d] notation).
Mat4 columns(Chirality c0, Chirality c1, Chirality c2, Chirality c3);

}  // namespace qwres
