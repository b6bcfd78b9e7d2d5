#include "qwres/presets.hpp"

#include "qwres/errors.hpp"

namespace qwres {

CoinField free_field(int M0) { return CoinField(M0); }

PermutationCoin corner_permutation(int m0, int n0) {
  if (m0 < 1 || n0 < 1) throw PreconditionError("corner model needs m0, n0 >= 1");
  using C = Chirality;
  auto entry = [](C a, C b, C c, C d) {
    PermutationEntry e;
    e.sigma = {a, b, c, d};
    return e;
  };
  std::map<Site, PermutationEntry> m;
  m[{0, 0}] = entry(C::Up, C::Left, C::Right, C::Down);
  m[{m0, 0}] = entry(C::Right, C::Up, C::Left, C::Down);
  m[{m0, n0}] = entry(C::Right, C::Down, C::Up, C::Left);
  m[{0, n0}] = entry(C::Down, C::Left, C::Up, C::Right);
  return PermutationCoin(std::max(m0, n0), std::move(m));
}

CoinField corner_field(int m0, int n0) { return corner_permutation(m0, n0).to_coin_field(); }

CoinField random_coin_field(int M0, std::uint64_t seed) {
  std::map<Site, Mat4> o;
  std::uint64_t k = 0;
  for (int a = -M0; a <= M0; ++a)
    for (int b = -M0; b <= M0; ++b)
      o[{a, b}] = random_unitary_coin(seed * 1000003ULL + k++);
  return CoinField(M0, std::move(o));
}

}  // namespace qwres
