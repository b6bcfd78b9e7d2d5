#include "qwres/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "qwres/errors.hpp"

namespace qwres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool ray_hits_box(Site x, Chirality c, int M0) {
  switch (c) {
    case Chirality::Left: return std::abs(x.x2) <= M0 && x.x1 > M0;
    case Chirality::Right: return std::abs(x.x2) <= M0 && x.x1 < -M0;
    case Chirality::Down: return std::abs(x.x1) <= M0 && x.x2 > M0;
    case Chirality::Up: return std::abs(x.x1) <= M0 && x.x2 < -M0;
  }
  return false;
}

}  // namespace

Mat4 PermutationEntry::matrix() const {
  Mat4 m = Mat4::Zero();
  for (int j = 0; j < 4; ++j)
    m(index(sigma[j]), j) = std::polar(1.0, alpha[j]);
  return m;
}

PermutationCoin::PermutationCoin(int M0, std::map<Site, PermutationEntry> entries)
    : M0_(M0), entries_(std::move(entries)) {
  if (M0_ < 1) throw PreconditionError("permutation coin needs M0 >= 1");
  for (auto& [x, e] : entries_) {
    if (chebyshev(x) > M0_)
      throw PreconditionError("permutation coin entry outside the box");
    std::array<bool, 4> seen{};
    for (Chirality c : e.sigma) seen[index(c)] = true;
    for (bool b : seen)
      if (!b) throw PreconditionError("sigma is not a permutation");
    for (double& a : e.alpha) a = wrap(a);
  }
}

PermutationCoin PermutationCoin::from_coin_field(const CoinField& coin, double tol) {
  std::map<Site, PermutationEntry> entries;
  for (const auto& [x, m] : coin.overrides()) {
    PermutationEntry e;
    for (int j = 0; j < 4; ++j) {
      int row = -1;
      for (int r = 0; r < 4; ++r) {
        if (std::abs(m(r, j)) <= tol) continue;
        if (row >= 0 || std::abs(std::abs(m(r, j)) - 1.0) > tol)
          throw PreconditionError("coin is not elastic (not a phase-weighted permutation)");
        row = r;
      }
      if (row < 0) throw PreconditionError("coin column vanishes");
      e.sigma[j] = chirality(row);
      e.alpha[j] = std::arg(m(row, j));
    }
    entries[x] = e;
  }
  return PermutationCoin(coin.M0(), std::move(entries));
}

Chirality PermutationCoin::output(Site x, Chirality in) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? in : it->second.sigma[index(in)];
}

double PermutationCoin::phase(Site x, Chirality in) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? 0.0 : it->second.alpha[index(in)];
}

CoinField PermutationCoin::to_coin_field() const {
  std::map<Site, Mat4> o;
  for (const auto& [x, e] : entries_) o[x] = e.matrix();
  return CoinField(M0_, std::move(o));
}

ClosedOrbit ClosedOrbit::canonical() const {
  if (cycle.empty()) return *this;
  auto it = std::min_element(cycle.begin(), cycle.end());
  auto k = static_cast<std::size_t>(it - cycle.begin());
  ClosedOrbit out;
  out.phase_sum = phase_sum;
  for (std::size_t t = 0; t < cycle.size(); ++t) {
    out.cycle.push_back(cycle[(k + t) % cycle.size()]);
    out.beta.push_back(beta[(k + t) % cycle.size()]);
  }
  return out;
}

TraceResult trace_trajectory(const PermutationCoin& coin, Site y, Chirality j) {
  const int M0 = coin.M0();
  Trajectory tr;
  tr.origin = {y, j};
  PhasePoint cur{y, j};
  // A bijective map on finitely many in-box states plus straight free
  // segments; this bound is never reached by a valid field.
  const long limit = 64L * (2L * M0 + 3) * (2L * M0 + 3) + 16L * (std::abs(y.x1) + std::abs(y.x2));
  for (long t = 0; t <= limit; ++t) {
    if (t > 0 && cur == tr.origin) {
      ClosedOrbit orbit;
      orbit.cycle = tr.samples;
      orbit.beta = tr.beta;
      double s = 0.0;
      for (double b : orbit.beta) s += b;
      orbit.phase_sum = s;
      return orbit;
    }
    tr.samples.push_back(cur);
    if (!coin.in_box(cur.q) && !ray_hits_box(cur.q, cur.p, M0)) {
      tr.beta.push_back(0.0);
      return Escaped{std::move(tr)};
    }
    double beta = coin.phase(cur.q, cur.p);
    Chirality out = coin.output(cur.q, cur.p);
    tr.beta.push_back(beta);
    cur = {cur.q + step(out), out};
  }
  throw NumericalError("trajectory neither closed nor escaped within the state bound");
}

std::vector<double> qc_spectrum(const ClosedOrbit& orbit) {
  const int N = orbit.period();
  if (N <= 0) throw PreconditionError("empty orbit");
  std::vector<double> out;
  out.reserve(N);
  for (int k = 0; k < N; ++k) out.push_back(wrap((-orbit.phase_sum + kTwoPi * k) / N));
  return out;
}

WalkState build_orbit_eigenfunction(const ClosedOrbit& orbit, double lambda) {
  const int N = orbit.period();
  if (N <= 0) throw PreconditionError("empty orbit");
  double mismatch = std::remainder(lambda * N + orbit.phase_sum, kTwoPi);
  if (std::abs(mismatch) > 1e-10 * std::max(1, N))
    throw PreconditionError("lambda does not satisfy the quantization condition");
  const cplx i(0, 1);
  WalkState u;
  cplx f = 1.0 / std::sqrt(double(N));
  for (int t = 0; t < N; ++t) {
    u.set(orbit.cycle[t].q, orbit.cycle[t].p, f);
    f *= std::exp(i * (lambda + orbit.beta[t]));
  }
  return u;
}

TrappingReport classify_trapping(const PermutationCoin& coin) {
  TrappingReport rep;
  std::set<PhasePoint> covered;
  const int R = coin.M0() + 1;
  for (int a = -R; a <= R; ++a)
    for (int b = -R; b <= R; ++b)
      for (Chirality c : kChiralities) {
        ++rep.starts_traced;
        PhasePoint start{{a, b}, c};
        if (covered.count(start)) continue;
        auto res = trace_trajectory(coin, start.q, start.p);
        if (auto* orbit = std::get_if<ClosedOrbit>(&res)) {
          for (const auto& p : orbit->cycle) covered.insert(p);
          rep.orbits.push_back(orbit->canonical());
        }
      }
  std::sort(rep.orbits.begin(), rep.orbits.end(),
            [](const ClosedOrbit& l, const ClosedOrbit& r) { return l.cycle.front() < r.cycle.front(); });
  rep.non_trapping = rep.orbits.empty();
  return rep;
}

PermutationCoin random_permutation_coin(int M0, std::uint64_t seed, double p_override,
                                        bool random_phases) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::map<Site, PermutationEntry> entries;
  for (int a = -M0; a <= M0; ++a)
    for (int b = -M0; b <= M0; ++b) {
      if (u01(rng) >= p_override) continue;
      PermutationEntry e;
      std::array<int, 4> perm{0, 1, 2, 3};
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int j = 0; j < 4; ++j) {
        e.sigma[j] = chirality(perm[j]);
        e.alpha[j] = random_phases ? kTwoPi * u01(rng) : 0.0;
      }
      entries[{a, b}] = e;
    }
  return PermutationCoin(M0, std::move(entries));
}

}  // namespace qwres
