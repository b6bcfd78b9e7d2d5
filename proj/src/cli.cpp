#include "qwres/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "qwres/barrier.hpp"
#include "qwres/elastic.hpp"
#include "qwres/io.hpp"
#include "qwres/parallel.hpp"
#include "qwres/presets.hpp"
#include "qwres/shape.hpp"
#include "qwres/spectral.hpp"

namespace qwres::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"evolve",       "trace",         "elastic-spec",
                                            "resonances",   "barrier-spec",  "barrier-norms",
                                            "corner-scan",  "shape-scan"};

const std::vector<std::string> kPresets = {
    "free",         "corner",          "one-corner",    "leaky-corner", "phase-corner",
    "barrier-trivial", "shape-trivial", "random",      "random-elastic"};

bool is_corner(const std::string& p) {
  return p == "corner" || p == "one-corner" || p == "leaky-corner" || p == "phase-corner";
}

bool is_barrier(const std::string& p) { return p == "barrier-trivial" || p == "shape-trivial"; }

bool member(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string default_preset(const std::string& command) {
  if (command == "evolve") return "random";
  if (command == "barrier-spec" || command == "barrier-norms") return "barrier-trivial";
  if (command == "corner-scan") return "one-corner";
  if (command == "shape-scan") return "shape-trivial";
  return "corner";
}

bool csv_capable(const std::string& command) {
  return command == "resonances" || command == "barrier-norms" || command == "corner-scan" ||
         command == "shape-scan";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CliError(kExitRange, "eps-grid: cannot read '" + item + "' as a number");
    }
  }
  return out;
}

void range(bool ok, const std::string& what) {
  if (!ok) throw CliError(kExitRange, what);
}

// -------------------------------------------------------------- config file

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw CliError(kExitFormat, "config key '" + key + "' has the wrong type");
  }
}

void apply_file(RunConfig& c, const json& doc) {
  if (!doc.is_object()) throw CliError(kExitFormat, "config file must hold a JSON object");
  if (doc.contains("coins")) {
    c.coin_doc = doc;
    return;
  }
  for (const auto& [k, v] : doc.items()) {
    if (k == "command") c.command = get_as<std::string>(v, k);
    else if (k == "preset") c.preset = get_as<std::string>(v, k);
    else if (k == "coin") {
      if (v.is_string()) c.coin_path = v.get<std::string>();
      else if (v.is_object()) c.coin_doc = v;
      else throw CliError(kExitFormat, "config key 'coin' must be a path or a coin object");
    } else if (k == "t") c.t = get_as<long>(v, k);
    else if (k == "strip-depth") c.strip_depth = get_as<double>(v, k);
    else if (k == "tol") c.tol = get_as<double>(v, k);
    else if (k == "eps") c.eps = get_as<double>(v, k);
    else if (k == "eps-grid") {
      if (v.is_string()) c.eps_grid = parse_grid(v.get<std::string>());
      else c.eps_grid = get_as<std::vector<double>>(v, k);
    } else if (k == "s") c.s = get_as<double>(v, k);
    else if (k == "mu0") c.mu0 = get_as<double>(v, k);
    else if (k == "M0") c.M0 = get_as<int>(v, k);
    else if (k == "m0") c.m0 = get_as<int>(v, k);
    else if (k == "n0") c.n0 = get_as<int>(v, k);
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
    else if (k == "x") c.x = get_as<int>(v, k);
    else if (k == "y") c.y = get_as<int>(v, k);
    else if (k == "chirality") c.chirality = get_as<std::string>(v, k);
    else if (k == "interior") c.interior = get_as<std::string>(v, k);
    else if (k == "weave") c.weave = get_as<std::string>(v, k);
    else if (k == "emit") c.emit = get_as<std::string>(v, k);
    else if (k == "output") c.output = get_as<std::string>(v, k);
    else if (k == "threads") c.threads = get_as<int>(v, k);
    else if (k == "timing") c.timing = get_as<bool>(v, k);
    else throw CliError(kExitFormat, "unknown config key '" + k + "'");
  }
}

}  // namespace

// --------------------------------------------------------------- RunConfig

void RunConfig::resolve() {
  if (!member(kCommands, command)) throw CliError(kExitUsage, "unknown command '" + command + "'");
  if (preset.empty()) preset = default_preset(command);
  range(member(kPresets, preset), "unknown preset '" + preset + "'");
  if (emit.empty()) emit = (command == "resonances" || !csv_capable(command)) ? "json" : "csv";
  range(emit == "json" || emit == "csv", "emit must be json or csv");
  range(emit == "json" || csv_capable(command), command + " has no CSV form");

  range(M0 >= 1 && M0 <= 20, "M0 must lie in [1, 20]");
  range(m0 >= 1 && m0 <= 20, "m0 must lie in [1, 20]");
  range(n0 >= 1 && n0 <= 20, "n0 must lie in [1, 20]");
  range(t >= 0 && t <= 10000000, "t must lie in [0, 1e7]");
  range(strip_depth > 0 && strip_depth <= 50, "strip-depth must lie in (0, 50]");
  range(tol > 0 && tol <= 0.1, "tol must lie in (0, 0.1]");
  range(eps >= 0 && eps <= 1, "eps must lie in [0, 1]");
  range(threads >= 0, "threads must be nonnegative");
  try {
    parse_chirality(chirality);
  } catch (const PreconditionError&) {
    throw CliError(kExitRange, "unknown chirality '" + chirality + "'");
  }
  range(interior == "identity" || interior == "random", "interior must be identity or random");
  range(weave == "both-axes" || weave == "per-side", "weave must be both-axes or per-side");

  if (eps_grid.empty()) {
    if (command == "corner-scan") eps_grid = {0.05, 0.1, 0.2};
    else if (command == "shape-scan") eps_grid = {0.4, 0.2, 0.1};
    else if (command == "barrier-norms") eps_grid = {0.1, 0.05, 0.025, 0.0125};
  }
  for (double e : eps_grid) range(e >= 0 && e <= 1, "eps-grid entries must lie in [0, 1]");
  if (!s) s = command == "corner-scan" ? 1.0 : 0.5;
  range(*s > 0 && *s <= 4, "s must lie in (0, 4]");
  if ((command == "shape-scan" || command == "barrier-norms") && *s > 0.5)
    warnings.push_back("s = " + io::format_double(*s) +
                       " lies beyond s <= 1/2; loops may no longer isolate the resonances");
  if (mu0) range(std::isfinite(*mu0), "mu0 must be finite");

  const bool has_coin = coin_doc.has_value() || !coin_path.empty();
  if (command == "corner-scan")
    range(!has_coin && is_corner(preset), "corner-scan needs a corner preset");
  if (command == "shape-scan" || command == "barrier-spec" || command == "barrier-norms")
    range(!has_coin && is_barrier(preset), command + " needs preset barrier-trivial or shape-trivial");
}

json RunConfig::to_json() const {
  json j{{"command", command},
         {"preset", preset},
         {"t", t},
         {"strip-depth", strip_depth},
         {"tol", tol},
         {"eps", eps},
         {"eps-grid", eps_grid},
         {"s", s ? json(*s) : json()},
         {"mu0", mu0 ? json(*mu0) : json()},
         {"M0", M0},
         {"m0", m0},
         {"n0", n0},
         {"seed", seed},
         {"x", x},
         {"y", y},
         {"chirality", chirality},
         {"interior", interior},
         {"weave", weave},
         {"emit", emit},
         {"output", output},
         {"threads", threads}};
  if (coin_doc) j["coin"] = *coin_doc;
  else if (!coin_path.empty()) j["coin"] = coin_path;
  return j;
}

// ------------------------------------------------------------ parse_config

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"qwres: eigenvalues and resonances of finitely perturbed 2D quantum walks"};
  app.set_help_flag("-h,--help", "Print this help and exit");

  std::string command, config_path, preset, coin, grid, chir, interior, weave, emit, output;
  long t = 0;
  double depth = 0, tol = 0, eps = 0, s = 0, mu0 = 0;
  int M0 = 0, m0 = 0, n0 = 0, x = 0, y = 0, threads = 0;
  std::uint64_t seed = 0;
  bool no_timing = false;

  app.add_option("command", command,
                 "evolve | trace | elastic-spec | resonances | barrier-spec | barrier-norms | "
                 "corner-scan | shape-scan");
  auto* o_config = app.add_option("--config", config_path,
                                  "JSON run config (keys as flag names) or a coin document");
  auto* o_preset = app.add_option(
      "--preset", preset,
      "free | corner | one-corner | leaky-corner | phase-corner | barrier-trivial | "
      "shape-trivial | random | random-elastic (default depends on the command)");
  auto* o_coin = app.add_option("--coin", coin, "Coin JSON file, replaces the preset");
  auto* o_t = app.add_option("--t", t, "Number of walk steps for evolve (default 100)");
  auto* o_depth = app.add_option("--strip-depth", depth, "Search down to Im kappa = -depth (default 2)");
  auto* o_tol = app.add_option("--tol", tol, "Root localisation tolerance (default 1e-7)");
  auto* o_eps = app.add_option("--eps", eps, "Perturbation size for corner and shape presets (default 0)");
  auto* o_grid = app.add_option("--eps-grid", grid, "Comma separated eps values for scans");
  auto* o_s = app.add_option("--s", s, "Loop exponent: half-width eps^s (corner-scan 1, else 0.5)");
  auto* o_mu0 = app.add_option("--mu0", mu0, "Loop centre for barrier-norms");
  auto* o_M0 = app.add_option("--M0", M0, "Box radius for free, random and barrier presets (default 1)");
  auto* o_m0 = app.add_option("--m0", m0, "Corner rectangle width (default 2)");
  auto* o_n0 = app.add_option("--n0", n0, "Corner rectangle height (default 2)");
  auto* o_seed = app.add_option("--seed", seed, "Seed for random presets (default 1)");
  auto* o_x = app.add_option("--x", x, "Start site, first coordinate (default 0)");
  auto* o_y = app.add_option("--y", y, "Start site, second coordinate (default 0)");
  auto* o_chir = app.add_option("--chirality", chir, "Start chirality: left | right | down | up");
  auto* o_int = app.add_option("--interior", interior, "Barrier interior coins: identity | random");
  auto* o_weave = app.add_option("--weave", weave, "Shape weave: both-axes | per-side");
  auto* o_emit = app.add_option("--emit", emit, "json | csv (scans default to csv)");
  auto* o_out = app.add_option("--output", output, "Write to this file instead of stdout");
  auto* o_threads = app.add_option("--threads", threads, "Worker cap (0: QWRES_THREADS or all cores)");
  app.add_flag("--no-timing", no_timing, "Emit null timing for byte-identical envelopes");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw CliError(kExitOk, app.help());
  } catch (const CLI::ConversionError& e) {
    throw CliError(kExitRange, e.what());
  } catch (const CLI::ParseError& e) {
    throw CliError(kExitUsage, e.what());
  }

  RunConfig c;
  if (o_config->count()) {
    try {
      apply_file(c, io::read_json_file(config_path));
    } catch (const FormatError& e) {
      throw CliError(kExitFormat, e.what());
    }
  }
  if (!command.empty()) c.command = command;
  if (c.command.empty()) throw CliError(kExitUsage, "a command is required (see --help)");
  if (o_preset->count()) c.preset = preset;
  if (o_coin->count()) {
    c.coin_path = coin;
    c.coin_doc.reset();
  }
  if (o_t->count()) c.t = t;
  if (o_depth->count()) c.strip_depth = depth;
  if (o_tol->count()) c.tol = tol;
  if (o_eps->count()) c.eps = eps;
  if (o_grid->count()) c.eps_grid = parse_grid(grid);
  if (o_s->count()) c.s = s;
  if (o_mu0->count()) c.mu0 = mu0;
  if (o_M0->count()) c.M0 = M0;
  if (o_m0->count()) c.m0 = m0;
  if (o_n0->count()) c.n0 = n0;
  if (o_seed->count()) c.seed = seed;
  if (o_x->count()) c.x = x;
  if (o_y->count()) c.y = y;
  if (o_chir->count()) c.chirality = chir;
  if (o_int->count()) c.interior = interior;
  if (o_weave->count()) c.weave = weave;
  if (o_emit->count()) c.emit = emit;
  if (o_out->count()) c.output = output;
  if (o_threads->count()) c.threads = threads;
  if (no_timing) c.timing = false;
  c.resolve();
  return c;
}

// --------------------------------------------------------------------- run

namespace {

BarrierSpec barrier_of(const RunConfig& c) {
  return c.interior == "random" ? random_interior_barrier(c.M0, c.seed) : trivial_barrier(c.M0);
}

WeavePolicy weave_of(const RunConfig& c) {
  return c.weave == "per-side" ? WeavePolicy::PerSide : WeavePolicy::BothAxes;
}

CornerPreset corner_of(const std::string& p) {
  return p == "corner" ? CornerPreset::OneCorner : parse_corner_preset(p);
}

CoinField model(const RunConfig& c) {
  if (c.coin_doc) return io::coin_field_from_json(*c.coin_doc);
  if (!c.coin_path.empty()) return io::load_coin_field(c.coin_path);
  const std::string& p = c.preset;
  if (p == "free") return free_field(c.M0);
  if (is_corner(p)) return make_corner_family(c.m0, c.n0, c.eps, corner_of(p)).field();
  if (p == "barrier-trivial") return barrier_of(c).coin_field();
  if (p == "shape-trivial") return make_shape_family(barrier_of(c), c.eps, weave_of(c)).coins;
  if (p == "random") return random_coin_field(c.M0, c.seed);
  if (p == "random-elastic") return random_permutation_coin(c.M0, c.seed).to_coin_field();
  throw PreconditionError("unknown preset '" + p + "'");
}

json points(const std::vector<PhasePoint>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back(io::to_json(p));
  return out;
}

json run_evolve(const RunConfig& c) {
  WalkOperator op(model(c));
  const Site x{c.x, c.y};
  const Chirality j = parse_chirality(c.chirality);
  WalkState u = op.evolve(WalkState::delta(x, j), c.t);
  u.prune();
  const double n = u.norm();
  return json{{"start", io::to_json(PhasePoint{x, j})},
              {"t", c.t},
              {"norm_initial", 1.0},
              {"norm_final", n},
              {"norm_defect", std::abs(n - 1.0)},
              {"support_size", u.size()},
              {"state", io::to_json(u)}};
}

json run_trace(const RunConfig& c) {
  PermutationCoin pc = PermutationCoin::from_coin_field(model(c));
  TraceResult r = trace_trajectory(pc, {c.x, c.y}, parse_chirality(c.chirality));
  if (auto* orbit = std::get_if<ClosedOrbit>(&r)) {
    json j{{"closed", true}, {"orbit", io::to_json(*orbit)}, {"spectrum", qc_spectrum(*orbit)}};
    return j;
  }
  const auto& path = std::get<Escaped>(r).path;
  return json{{"closed", false},
              {"path", points(path.samples)},
              {"beta", path.beta},
              {"steps_in_box", path.samples.size()}};
}

json run_elastic_spec(const RunConfig& c) {
  PermutationCoin pc = PermutationCoin::from_coin_field(model(c));
  TrappingReport rep = classify_trapping(pc);
  json orbits = json::array();
  std::vector<std::pair<double, int>> all;
  for (std::size_t k = 0; k < rep.orbits.size(); ++k) {
    json o = io::to_json(rep.orbits[k]);
    o["id"] = k;
    orbits.push_back(o);
    for (double l : qc_spectrum(rep.orbits[k])) all.push_back({l, static_cast<int>(k)});
  }
  std::sort(all.begin(), all.end());
  json spectrum = json::array();
  for (std::size_t i = 0; i < all.size();) {
    std::size_t k = i;
    json ids = json::array();
    while (k < all.size() && all[k].first - all[i].first < 1e-9) ids.push_back(all[k++].second);
    spectrum.push_back({{"phase", all[i].first}, {"multiplicity", ids.size()}, {"orbits", ids}});
    i = k;
  }
  return json{{"non_trapping", rep.non_trapping},
              {"starts_traced", rep.starts_traced},
              {"orbits", orbits},
              {"spectrum", spectrum}};
}

RootSearch run_resonances(const RunConfig& c) {
  RootOptions opt;
  opt.tol = c.tol;
  return locate_roots(model(c), fundamental_strip(c.strip_depth), opt);
}

InteriorUnitary interior_of(const RunConfig& c, NonPenetrable* keep = nullptr) {
  NonPenetrable np = build_nonpenetrable(barrier_of(c));
  InteriorUnitary iu = interior_spectrum(np.graph, np.coin);
  if (keep) *keep = std::move(np);
  return iu;
}

json multiplicity_list(const InteriorUnitary& iu) {
  json out = json::array();
  for (auto [phase, m] : iu.multiplicities()) out.push_back({{"phase", phase}, {"multiplicity", m}});
  return out;
}

json run_barrier_spec(const RunConfig& c) {
  NonPenetrable np;
  InteriorUnitary iu = interior_of(c, &np);
  std::vector<double> phases(iu.phases.data(), iu.phases.data() + iu.phases.size());
  std::sort(phases.begin(), phases.end());
  return json{{"N", iu.graph.N()},
              {"eigenphases", phases},
              {"multiplicities", multiplicity_list(iu)},
              {"leakage", np.leakage},
              {"interior", barrier_of(c).interior_label},
              {"exterior",
               {{"boundary_inputs", np.exterior.boundary_inputs.size()},
                {"starts_traced", np.exterior.starts_traced},
                {"non_trapping", np.exterior.non_trapping}}},
              {"residuals",
               {{"unitarity", iu.unitarity_residual},
                {"modulus", iu.modulus_residual},
                {"eigen", iu.eigen_residual}}}};
}

double default_mu0(const InteriorUnitary& iu) {
  auto m = iu.multiplicities();
  auto best = std::min_element(m.begin(), m.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
  return best->first;
}

std::vector<double> interior_phases(const RunConfig& c) {
  std::vector<double> out;
  for (auto [phase, m] : interior_of(c).multiplicities()) out.push_back(phase);
  return out;
}

std::vector<double> corner_mu0(const RunConfig& c) {
  std::vector<double> out;
  const int half = c.m0 + c.n0;
  for (int k = 0; k < 2 * half; ++k) out.push_back(std::numbers::pi * k / half);
  return out;
}

json rows_json(const std::vector<ScanRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    const bool none = r.count == 0;
    out.push_back({{"eps", r.eps},
                   {"mu0", r.mu0},
                   {"count", r.count},
                   {"root", none ? json() : io::to_json(r.root)},
                   {"w_abs", none ? json() : json(r.w_abs)},
                   {"dist_to_mu0", none ? json() : json(r.dist_to_mu0)}});
  }
  return out;
}

// r(eps) = max |kappa - mu0| / eps over the located roots.
json drift_fit(const std::vector<ScanRow>& rows) {
  std::map<double, double> r;
  for (const auto& x : rows)
    if (x.count > 0 && x.eps > 0) r[x.eps] = std::max(r[x.eps], x.dist_to_mu0 / x.eps);
  json out = json::array();
  for (auto [eps, v] : r) out.push_back({{"eps", eps}, {"r", v}});
  return out;
}

std::string envelope(const RunConfig& c, const json& payload, double seconds) {
  json env{{"toolkit", {{"name", "qwres"}, {"version", kVersion}}},
           {"config", c.to_json()},
           {"timing", c.timing ? json{{"seconds", seconds}} : json()},
           {"payload", payload}};
  return env.dump(2) + "\n";
}

}  // namespace

RunResult run(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  RunResult out;
  try {
    json payload;
    std::string csv;
    const std::string& cmd = c.command;
    if (cmd == "evolve") payload = run_evolve(c);
    else if (cmd == "trace") payload = run_trace(c);
    else if (cmd == "elastic-spec") payload = run_elastic_spec(c);
    else if (cmd == "resonances") {
      RootSearch rs = run_resonances(c);
      if (c.emit == "csv") csv = io::roots_csv(rs);
      else payload = io::to_json(rs);
    } else if (cmd == "barrier-spec") payload = run_barrier_spec(c);
    else if (cmd == "barrier-norms") {
      InteriorUnitary iu = interior_of(c);
      const double mu0 = c.mu0 ? *c.mu0 : default_mu0(iu);
      std::ostringstream os;
      os << "eps,s,max_norm\n";
      json rows = json::array();
      for (double e : c.eps_grid) {
        double n = norm_on_loop(iu, mu0, e, *c.s);
        os << io::format_double(e) << ',' << io::format_double(*c.s) << ','
           << io::format_double(n) << '\n';
        rows.push_back({{"eps", e}, {"s", *c.s}, {"max_norm", n}});
      }
      csv = os.str();
      payload = json{{"mu0", mu0}, {"rows", rows}};
    } else if (cmd == "corner-scan" || cmd == "shape-scan") {
      std::vector<ScanRow> rows;
      if (cmd == "corner-scan") {
        const CornerPreset p = corner_of(c.preset);
        rows = migration_scan(
            [&](double e) { return make_corner_family(c.m0, c.n0, e, p).field(); }, c.eps_grid,
            corner_mu0(c), *c.s, c.tol);
      } else {
        const BarrierSpec spec = barrier_of(c);
        rows = migration_scan(
            [&](double e) { return make_shape_family(spec, e, weave_of(c)).coins; }, c.eps_grid,
            interior_phases(c), *c.s, c.tol);
      }
      csv = io::scan_csv(rows);
      payload = json{{"rows", rows_json(rows)}};
      if (cmd == "corner-scan") payload["drift"] = drift_fit(rows);
    }
    out.text = c.emit == "csv" ? csv : envelope(c, payload, seconds());
  } catch (const NumericalError& e) {
    json payload{{"error", {{"kind", "numerical"}, {"message", e.what()}}}};
    if (auto* bz = dynamic_cast<const BoundaryZero*>(&e)) payload["error"]["where"] = io::to_json(bz->where);
    out.exit_code = kExitNumerical;
    out.text = envelope(c, payload, seconds());
  } catch (const FormatError& e) {
    throw CliError(kExitFormat, e.what());
  } catch (const PreconditionError& e) {
    throw CliError(kExitRange, e.what());
  }
  return out;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = parse_config(args);
    for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
    if (cfg.threads > 0) set_thread_limit(cfg.threads);
    RunResult r = run(cfg);
    if (cfg.output.empty()) {
      out << r.text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!f) {
        err << "error: cannot write " << cfg.output << '\n';
        return kExitFormat;
      }
      f << r.text;
    }
    if (r.exit_code == kExitNumerical) err << "error: numerical failure, see payload\n";
    return r.exit_code;
  } catch (const CliError& e) {
    if (e.code == kExitOk) {
      out << e.what();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return e.code;
  }
}

}  // namespace qwres::cli
