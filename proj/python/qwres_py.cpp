#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qwres/barrier.hpp"
#include "qwres/cli.hpp"
#include "qwres/elastic.hpp"
#include "qwres/io.hpp"
#include "qwres/presets.hpp"
#include "qwres/shape.hpp"
#include "qwres/spectral.hpp"

namespace py = pybind11;
using namespace qwres;

namespace {

Site site(std::pair<int, int> x) { return {x.first, x.second}; }

Rect rect(std::array<double, 4> r) { return {r[0], r[1], r[2], r[3]}; }

/// {(x1, x2): [a_left, a_right, a_down, a_up]}
py::dict state_to_dict(const WalkState& u) {
  py::dict d;
  for (const auto& [x, a] : u.sites())
    d[py::make_tuple(x.x1, x.x2)] = std::vector<cplx>(a.begin(), a.end());
  return d;
}

WalkState state_from_dict(const py::dict& d) {
  WalkState u;
  for (auto [k, v] : d) {
    auto x = k.cast<std::pair<int, int>>();
    auto a = v.cast<std::vector<cplx>>();
    if (a.size() != 4) throw PreconditionError("each site needs four amplitudes");
    for (int c = 0; c < 4; ++c) u.add(site(x), chirality(c), a[c]);
  }
  return u;
}

py::dict root_search(const RootSearch& rs) {
  py::list roots;
  for (const auto& r : rs.roots) {
    py::dict d;
    d["kappa"] = r.kappa;
    d["w"] = r.w();
    d["multiplicity"] = r.multiplicity;
    d["kind"] = r.kind == RootKind::Eigenvalue ? "eigenvalue" : "resonance";
    d["residual"] = r.residual;
    roots.append(d);
  }
  py::dict out;
  out["roots"] = roots;
  out["winding_total"] = rs.winding_total;
  return out;
}

InteriorUnitary interior(const BarrierSpec& spec) {
  NonPenetrable np = build_nonpenetrable(spec);
  return interior_spectrum(np.graph, np.coin);
}

BarrierSpec barrier(int M0, std::optional<std::uint64_t> seed) {
  return seed ? random_interior_barrier(M0, *seed) : trivial_barrier(M0);
}

WeavePolicy policy(const std::string& s) {
  if (s == "both-axes") return WeavePolicy::BothAxes;
  if (s == "per-side") return WeavePolicy::PerSide;
  throw PreconditionError("weave must be both-axes or per-side");
}

}  // namespace

PYBIND11_MODULE(_qwres, m) {
  m.doc() = "Eigenvalues and resonances of finitely perturbed 2D quantum walks";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<CoinField>(m, "CoinField")
      .def(py::init([](int M0, const std::map<std::pair<int, int>, Mat4>& coins) {
             std::map<Site, Mat4> o;
             for (const auto& [x, c] : coins) o[site(x)] = c;
             return CoinField(M0, std::move(o));
           }),
           py::arg("M0"), py::arg("coins") = std::map<std::pair<int, int>, Mat4>{})
      .def_property_readonly("M0", &CoinField::M0)
      .def("at", [](const CoinField& f, std::pair<int, int> x) { return Mat4(f.at(site(x))); })
      .def("active_sites",
           [](const CoinField& f) {
             std::vector<std::pair<int, int>> out;
             for (Site x : f.active_sites()) out.push_back({x.x1, x.x2});
             return out;
           })
      .def("to_json", [](const CoinField& f) { return io::to_json(f).dump(); })
      .def_static("from_json", [](const std::string& s) {
        return io::coin_field_from_json(nlohmann::json::parse(s));
      });

  m.def("free_field", &free_field, py::arg("M0") = 1);
  m.def("corner_field", &corner_field, py::arg("m0") = 2, py::arg("n0") = 2);
  m.def("random_coin_field", &random_coin_field, py::arg("M0"), py::arg("seed"));
  m.def(
      "corner_family_field",
      [](int m0, int n0, double eps, const std::string& preset) {
        return make_corner_family(m0, n0, eps, parse_corner_preset(preset)).field();
      },
      py::arg("m0"), py::arg("n0"), py::arg("eps"), py::arg("preset") = "one-corner");
  m.def(
      "barrier_field", [](int M0, std::optional<std::uint64_t> seed) { return barrier(M0, seed).coin_field(); },
      py::arg("M0") = 1, py::arg("seed") = py::none());
  m.def(
      "shape_field",
      [](int M0, double eps, const std::string& weave) {
        return make_shape_family(trivial_barrier(M0), eps, policy(weave)).coins;
      },
      py::arg("M0"), py::arg("eps"), py::arg("weave") = "both-axes");

  m.def(
      "evolve",
      [](const CoinField& f, const py::dict& u, long t) {
        return state_to_dict(WalkOperator(f).evolve(state_from_dict(u), t));
      },
      py::arg("coin"), py::arg("state"), py::arg("t"));
  m.def(
      "delta",
      [](std::pair<int, int> x, const std::string& c) {
        return state_to_dict(WalkState::delta(site(x), parse_chirality(c)));
      },
      py::arg("x"), py::arg("chirality"));

  m.def("det", [](const CoinField& f, cplx kappa) { return det_value(f, kappa).D; }, py::arg("coin"),
        py::arg("kappa"));
  m.def(
      "winding_number", [](const CoinField& f, std::array<double, 4> r) { return winding_number(f, rect(r)); },
      py::arg("coin"), py::arg("rect"), "rect = (re_lo, re_hi, im_lo, im_hi)");
  m.def(
      "locate_roots",
      [](const CoinField& f, double strip_depth, double tol) {
        return root_search(locate_roots(f, fundamental_strip(strip_depth), tol));
      },
      py::arg("coin"), py::arg("strip_depth") = 2.0, py::arg("tol") = 1e-7);
  m.def(
      "resolvent_element",
      [](const CoinField& f, cplx kappa, const py::dict& u, const py::dict& v) {
        return ContinuedResolvent(f, kappa).element(state_from_dict(u), state_from_dict(v));
      },
      py::arg("coin"), py::arg("kappa"), py::arg("f"), py::arg("g"));

  m.def(
      "elastic_spectrum",
      [](const CoinField& f) {
        TrappingReport rep = classify_trapping(PermutationCoin::from_coin_field(f));
        py::list orbits;
        for (const auto& o : rep.orbits) {
          py::dict d;
          d["period"] = o.period();
          d["phase_sum"] = o.phase_sum;
          d["spectrum"] = qc_spectrum(o);
          orbits.append(d);
        }
        return orbits;
      },
      py::arg("coin"));

  m.def(
      "qc2_roots",
      [](int m0, int n0, double eps, const std::string& preset) {
        QuantizationData q = corner_quantization(make_corner_family(m0, n0, eps, parse_corner_preset(preset))).data;
        return std::make_tuple(q.c_plus, q.c_minus, q.kappa_plus, q.kappa_minus);
      },
      py::arg("m0"), py::arg("n0"), py::arg("eps"), py::arg("preset") = "one-corner");

  m.def(
      "interior_phases",
      [](int M0, std::optional<std::uint64_t> seed) {
        InteriorUnitary iu = interior(barrier(M0, seed));
        return Eigen::VectorXd(iu.phases);
      },
      py::arg("M0") = 1, py::arg("seed") = py::none());
  m.def(
      "interior_matrix",
      [](int M0, std::optional<std::uint64_t> seed) { return Eigen::MatrixXcd(interior(barrier(M0, seed)).U); },
      py::arg("M0") = 1, py::arg("seed") = py::none());
  m.def(
      "green_apply",
      [](int M0, std::optional<std::uint64_t> seed, cplx kappa, const Eigen::VectorXcd& f, cplx theta) {
        return Eigen::VectorXcd(green_apply(interior(barrier(M0, seed)), kappa, f, theta));
      },
      py::arg("M0"), py::arg("seed"), py::arg("kappa"), py::arg("f"), py::arg("theta") = cplx{});
  m.def(
      "norm_on_loop",
      [](int M0, double mu0, double eps, double s) { return norm_on_loop(interior(trivial_barrier(M0)), mu0, eps, s); },
      py::arg("M0"), py::arg("mu0"), py::arg("eps"), py::arg("s"));

  m.def(
      "migration_scan",
      [](const std::function<CoinField(double)>& family, const std::vector<double>& eps_grid,
         const std::vector<double>& mu0, double s, double tol) {
        std::vector<py::dict> rows;
        std::vector<ScanRow> r;
        {
          std::vector<CoinField> fields;
          for (double e : eps_grid) fields.push_back(family(e));
          std::map<double, std::size_t> at;
          for (std::size_t i = 0; i < eps_grid.size(); ++i) at[eps_grid[i]] = i;
          r = migration_scan([&](double e) { return fields[at.at(e)]; }, eps_grid, mu0, s, tol);
        }
        for (const auto& x : r) {
          py::dict d;
          d["eps"] = x.eps;
          d["mu0"] = x.mu0;
          d["count"] = x.count;
          d["root"] = x.root;
          d["w_abs"] = x.w_abs;
          d["dist_to_mu0"] = x.dist_to_mu0;
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("family"), py::arg("eps_grid"), py::arg("mu0"), py::arg("s"), py::arg("tol") = 1e-7);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::main(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = cli::kVersion;
}
