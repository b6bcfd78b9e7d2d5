#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwres/elastic.hpp"
#include "qwres/lattice.hpp"

namespace qwres {

/// Identity coins on a box of radius M0.
CoinField free_field(int M0 = 1);

/// Elastic corner model: permutation coins at (0,0), (m0,0), (m0,n0),
/// (0,n0) steering the walker around the rectangle; M0 = max(m0, n0).
PermutationCoin corner_permutation(int m0, int n0);
CoinField corner_field(int m0, int n0);

/// Independent Haar coins on every site of the box.
CoinField random_coin_field(int M0, std::uint64_t seed);

}  // namespace qwres
