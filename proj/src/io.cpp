#include "qwres/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qwres/errors.hpp"

namespace qwres::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re") && j.contains("im") && j.size() == 2 &&
      j["re"].is_number() && j["im"].is_number())
    return {j["re"].get<double>(), j["im"].get<double>()};
  throw FormatError("complex number must be a number, [re, im] or {\"re\", \"im\"}");
}

json to_json(const CoinField& coin) {
  json coins = json::array();
  for (const auto& [x, m] : coin.overrides()) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
      json row = json::array();
      for (int c = 0; c < 4; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
      rows.push_back(row);
    }
    coins.push_back({{"x", {x.x1, x.x2}}, {"m", rows}});
  }
  return json{{"M0", coin.M0()}, {"coins", coins}};
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw FormatError("coin document: " + what);
}

}  // namespace

CoinField coin_field_from_json(const json& j) {
  require(j.is_object(), "top level must be an object");
  for (const auto& [k, v] : j.items())
    require(k == "M0" || k == "coins", "unknown key '" + k + "'");
  require(j.contains("M0") && j["M0"].is_number_integer(), "integer M0 required");
  require(j.contains("coins") && j["coins"].is_array(), "coins array required");
  int M0 = j["M0"].get<int>();
  std::map<Site, Mat4> overrides;
  for (const auto& e : j["coins"]) {
    require(e.is_object() && e.contains("x") && e.contains("m") && e.size() == 2,
            "each coin needs exactly x and m");
    const auto& xs = e["x"];
    require(xs.is_array() && xs.size() == 2 && xs[0].is_number_integer() &&
                xs[1].is_number_integer(),
            "x must be [x1, x2]");
    Site x{xs[0].get<int>(), xs[1].get<int>()};
    const auto& m = e["m"];
    require(m.is_array() && m.size() == 4, "m must have 4 rows");
    Mat4 c;
    for (int r = 0; r < 4; ++r) {
      require(m[r].is_array() && m[r].size() == 4, "m rows must have 4 entries");
      for (int k = 0; k < 4; ++k) c(r, k) = complex_from_json(m[r][k]);
    }
    require(!overrides.count(x), "duplicate site");
    overrides[x] = c;
  }
  return CoinField(M0, std::move(overrides));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

CoinField load_coin_field(const std::string& path) {
  return coin_field_from_json(read_json_file(path));
}

json to_json(const PhasePoint& p) {
  return json{{"x", {p.q.x1, p.q.x2}}, {"chirality", std::string(name(p.p))}};
}

json to_json(const ClosedOrbit& orbit) {
  json cycle = json::array();
  for (const auto& p : orbit.cycle) cycle.push_back(to_json(p));
  return json{{"period", orbit.period()},
              {"phase_sum", orbit.phase_sum},
              {"beta", orbit.beta},
              {"cycle", cycle}};
}

json to_json(const Root& r) {
  return json{{"kappa", to_json(r.kappa)},
              {"w", to_json(r.w())},
              {"multiplicity", r.multiplicity},
              {"kind", r.kind == RootKind::Eigenvalue ? "eigenvalue" : "resonance"},
              {"residual", r.residual}};
}

json to_json(const RootSearch& rs) {
  json roots = json::array();
  for (const auto& r : rs.roots) roots.push_back(to_json(r));
  return json{{"roots", roots},
              {"winding_total", rs.winding_total},
              {"region",
               {{"re", {rs.region.re_lo, rs.region.re_hi}},
                {"im", {rs.region.im_lo, rs.region.im_hi}}}}};
}

json to_json(const WalkState& u) {
  json sites = json::array();
  for (const auto& [x, a] : u.sites()) {
    json amp = json::array();
    for (const auto& z : a) amp.push_back({z.real(), z.imag()});
    sites.push_back({{"x", {x.x1, x.x2}}, {"amp", amp}});
  }
  return sites;
}

WalkState walk_state_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("walk state must be an array of sites");
  WalkState u;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("x") || !e.contains("amp") || e["x"].size() != 2 ||
        !e["amp"].is_array() || e["amp"].size() != 4)
      throw FormatError("walk state entries need x = [x1, x2] and amp with 4 entries");
    Site x{e["x"][0].get<int>(), e["x"][1].get<int>()};
    for (int c = 0; c < 4; ++c) u.add(x, chirality(c), complex_from_json(e["amp"][c]));
  }
  return u;
}

json to_json(const OutgoingState& s) {
  auto tail = [](const std::map<int, cplx>& t) {
    json out = json::array();
    for (const auto& [k, a] : t) out.push_back({{"at", k}, {"a", to_json(a)}});
    return out;
  };
  return json{{"kappa", to_json(s.kappa)},
              {"M0", s.M0},
              {"core", to_json(s.core)},
              {"tails",
               {{"left", tail(s.tail_left)},
                {"right", tail(s.tail_right)},
                {"down", tail(s.tail_down)},
                {"up", tail(s.tail_up)}}}};
}

std::string roots_csv(const RootSearch& rs) {
  std::ostringstream os;
  os << "kappa_re,kappa_im,w_re,w_im,multiplicity,kind,residual\n";
  for (const auto& r : rs.roots) {
    cplx w = r.w();
    os << format_double(r.kappa.real()) << ',' << format_double(r.kappa.imag()) << ','
       << format_double(w.real()) << ',' << format_double(w.imag()) << ',' << r.multiplicity
       << ',' << (r.kind == RootKind::Eigenvalue ? "eigenvalue" : "resonance") << ','
       << format_double(r.residual) << '\n';
  }
  return os.str();
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream os;
  os << "eps,mu0,count,root_re,root_im,w_abs,dist_to_mu0\n";
  for (const auto& r : rows)
    os << format_double(r.eps) << ',' << format_double(r.mu0) << ',' << r.count << ','
       << format_double(r.root.real()) << ',' << format_double(r.root.imag()) << ','
       << format_double(r.w_abs) << ',' << format_double(r.dist_to_mu0) << '\n';
  return os.str();
}

}  // namespace qwres::io
