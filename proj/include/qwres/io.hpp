#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qwres/barrier.hpp"
#include "qwres/elastic.hpp"
#include "qwres/shape.hpp"
#include "qwres/spectral.hpp"
#include "qwres/translation.hpp"

namespace qwres::io {

using json = nlohmann::json;

/// Shortest text with 17 significant digits, '.' decimal, no locale; NaN -> "nan".
std::string format_double(double v);

json to_json(cplx z);  ///< {"re", "im"}
cplx complex_from_json(const json& j);

/// {"M0": n, "coins": [{"x": [x1, x2], "m": 4x4 rows of [re, im]}]}
json to_json(const CoinField& coin);
/// Throws FormatError on structure problems, PreconditionError on a bad coin.
CoinField coin_field_from_json(const json& j);
CoinField load_coin_field(const std::string& path);
/// Parses a file; FormatError on malformed JSON.
json read_json_file(const std::string& path);

json to_json(const PhasePoint& p);
json to_json(const ClosedOrbit& orbit);
json to_json(const Root& r);
json to_json(const RootSearch& rs);
json to_json(const WalkState& u);
WalkState walk_state_from_json(const json& j);
json to_json(const OutgoingState& s);

/// CSV text for a root list: kappa_re,kappa_im,w_re,w_im,multiplicity,kind,residual.
std::string roots_csv(const RootSearch& rs);
/// eps,mu0,count,root_re,root_im,w_abs,dist_to_mu0
std::string scan_csv(const std::vector<ScanRow>& rows);

}  // namespace qwres::io
