#include "latspec/cli.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace latspec;

namespace {

Int to_int(py::handle h) {
  if (!py::isinstance<py::int_>(h) || py::isinstance<py::bool_>(h)) throw py::type_error("expected an int");
  return parse_int(py::str(h).cast<std::string>());
}

py::int_ from_int(const Int& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.get_str().c_str(), nullptr, 10));
}

py::object fraction(const Rational& q) {
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(from_int(q.get_num()), from_int(q.get_den()));
}

Rational to_rational(py::handle h) {
  if (py::isinstance<py::str>(h)) return parse_rational(h.cast<std::string>());
  if (py::isinstance<py::int_>(h)) return Rational(to_int(h));
  if (py::hasattr(h, "numerator") && py::hasattr(h, "denominator")) {
    Rational q(to_int(h.attr("numerator")), to_int(h.attr("denominator")));
    q.canonicalize();
    return q;
  }
  throw py::type_error("expected an int, a Fraction or a 'p/q' string");
}

LatVec to_vec(py::handle h) {
  std::vector<Int> c;
  for (auto x : py::iter(h)) c.push_back(to_int(x));
  if (c.empty()) throw py::value_error("vectors need at least one coordinate");
  return LatVec(std::move(c));
}

py::tuple from_vec(const LatVec& v) {
  py::tuple out(v.rank());
  for (std::size_t i = 0; i < v.rank(); ++i) out[i] = from_int(v.coords()[i]);
  return out;
}

std::vector<LatVec> to_vecs(py::handle h) {
  std::vector<LatVec> out;
  for (auto x : py::iter(h)) out.push_back(to_vec(x));
  return out;
}

py::list from_vecs(std::span<const LatVec> vs) {
  py::list out;
  for (const auto& v : vs) out.append(from_vec(v));
  return out;
}

IntMatrix to_matrix(py::handle rows) {
  std::vector<std::vector<Int>> m;
  for (auto row : py::iter(rows)) m.push_back(to_vec(row).coords());
  if (m.empty()) throw py::value_error("empty matrix");
  for (const auto& r : m)
    if (r.size() != m.front().size()) throw py::value_error("ragged matrix");
  return IntMatrix::from_rows(m);
}

py::list from_matrix(const IntMatrix& m) {
  py::list out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.append(py::list(from_vec(m.row(i))));
  return out;
}

FiniteSet to_set(const FiniteSystem& sys, py::handle elements) {
  std::vector<FiniteSystem::Element> e;
  for (auto x : py::iter(elements)) e.push_back(x.cast<std::size_t>());
  return make_set(sys, e);
}

ErgodicSetSpec to_spec(const std::string& name) {
  if (name == "integers") return ErgodicSetSpec::integers();
  if (name == "interval") return ErgodicSetSpec::interval();
  throw py::value_error("ergodic set must be 'integers' or 'interval'");
}

PointSet to_points(py::handle points) {
  auto v = to_vecs(points);
  if (v.empty()) throw py::value_error("empty point set");
  const std::size_t r = v.front().rank();
  return PointSet(r, std::move(v));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact lattice, haystack, volume and spectral computations";
  m.attr("__version__") = cli::kVersion;

  py::register_exception<Error>(m, "LatspecError", PyExc_ValueError);
  py::register_exception<HardFailure>(m, "HardFailure", PyExc_RuntimeError);
  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

  // lattice
  m.def("det", [](py::handle rows) { return from_int(det_exact(to_matrix(rows))); }, py::arg("matrix"));
  m.def("hnf", [](py::handle rows) { return from_matrix(hnf(to_matrix(rows)).basis); }, py::arg("matrix"),
        "Column Hermite normal form of the lattice spanned by the columns.");
  m.def(
      "invariant_factors",
      [](py::handle rows) {
        py::list out;
        for (const auto& d : snf(to_matrix(rows)).invariant_factors) out.append(from_int(d));
        return out;
      },
      py::arg("matrix"));
  m.def("is_primitive", [](py::handle v) { return is_primitive(to_vec(v)); }, py::arg("vector"));
  m.def("complete_to_basis", [](py::handle v) { return from_matrix(complete_to_basis(to_vec(v))); }, py::arg("vector"));

  // haystack
  m.def(
      "haystack",
      [](py::handle multipliers, std::size_t count, py::object basis) {
        std::vector<Int> mult;
        for (auto x : py::iter(multipliers)) mult.push_back(to_int(x));
        std::vector<LatVec> b;
        if (basis.is_none()) {
          for (std::size_t i = 0; i < mult.size(); ++i) b.push_back(LatVec::unit(mult.size(), i));
        } else {
          b = to_vecs(basis);
        }
        return from_vecs(make_haystack(std::move(b), std::move(mult), count));
      },
      py::arg("multipliers"), py::arg("count"), py::arg("basis") = py::none());
  m.def(
      "verify_haystack_sample",
      [](py::handle vectors, std::size_t rank, unsigned threads) {
        const auto v = verify_haystack_sample(to_vecs(vectors), rank, threads);
        py::dict out;
        out["ok"] = v.ok;
        out["violation"] = v.violation;
        out["reason"] = v.reason;
        return out;
      },
      py::arg("vectors"), py::arg("rank"), py::arg("threads") = 1);

  // volume
  m.def(
      "volume_spectrum",
      [](py::handle points, py::object cap, unsigned threads) {
        std::optional<Int> c;
        if (!cap.is_none()) c = to_int(cap);
        py::list out;
        for (const auto& v : volume_spectrum(to_points(points), c, threads)) out.append(from_int(v));
        return out;
      },
      py::arg("points"), py::arg("cap") = py::none(), py::arg("threads") = 1);
  m.def(
      "ap_certificate",
      [](py::handle points, std::uint64_t terms, unsigned threads) {
        const auto cert = ap_certificate(to_points(points), terms, threads);
        py::dict out;
        out["found"] = cert.found;
        out["n"] = from_int(cert.n);
        py::list ws;
        for (const auto& w : cert.witnesses) ws.append(py::make_tuple(from_int(w.det), from_vecs(w.vertices)));
        out["witnesses"] = ws;
        out["failure"] = cert.failure;
        return out;
      },
      py::arg("points"), py::arg("terms"), py::arg("threads") = 1);

  // systems
  py::class_<FiniteSystem>(m, "FiniteSystem")
      .def_static("from_sublattice", [](py::handle rows) { return FiniteSystem::from_sublattice(SubLattice(to_matrix(rows))); },
                  py::arg("matrix"))
      .def_static(
          "from_action",
          [](py::handle moduli, py::handle images) {
            std::vector<Int> mods;
            for (auto x : py::iter(moduli)) mods.push_back(to_int(x));
            std::vector<std::vector<Int>> imgs;
            for (const auto& v : to_vecs(images)) imgs.push_back(v.coords());
            return FiniteSystem::from_action(std::move(mods), std::move(imgs));
          },
          py::arg("moduli"), py::arg("images"))
      .def_property_readonly("size", &FiniteSystem::size)
      .def_property_readonly("rank", &FiniteSystem::rank)
      .def_property_readonly("moduli",
                             [](const FiniteSystem& s) {
                               py::list out;
                               for (const auto& d : s.moduli()) out.append(from_int(d));
                               return out;
                             })
      .def_property_readonly("exponent", [](const FiniteSystem& s) { return from_int(s.exponent()); })
      .def("phi", [](const FiniteSystem& s, py::handle v) { return s.phi(to_vec(v)); }, py::arg("vector"))
      .def(
          "decode",
          [](const FiniteSystem& s, std::size_t a) {
            py::list out;
            for (const auto& r : s.decode(a)) out.append(from_int(r));
            return py::tuple(out);
          },
          py::arg("element"))
      .def(
          "encode",
          [](const FiniteSystem& s, py::handle residues) {
            std::vector<Int> r;
            for (auto x : py::iter(residues)) r.push_back(to_int(x));
            return s.encode(r);
          },
          py::arg("residues"))
      .def("__repr__", &FiniteSystem::describe);

  m.def(
      "max_directional_expansion",
      [](const FiniteSystem& sys, py::handle elements, std::int64_t radius) {
        const auto best = max_directional_expansion(sys, to_set(sys, elements), candidate_box(sys.rank(), radius));
        return py::make_tuple(fraction(best.measure), from_vec(best.argmax));
      },
      py::arg("system"), py::arg("elements"), py::arg("radius"));
  m.def(
      "expansion_bound_check",
      [](const FiniteSystem& sys, py::handle elements, py::handle lambda, const std::string& ergodic_set) {
        const auto c = expansion_bound_check(sys, to_set(sys, elements), to_vec(lambda), to_spec(ergodic_set));
        py::dict out;
        out["annihilator_mass"] = fraction(c.annihilator_mass);
        out["bound"] = fraction(c.bound);
        out["measured"] = fraction(c.measured);
        out["holds"] = c.holds;
        out["tight"] = c.tight;
        return out;
      },
      py::arg("system"), py::arg("elements"), py::arg("lam"), py::arg("ergodic_set") = "integers");

  // spectral
  m.def(
      "spectral_masses",
      [](const FiniteSystem& sys, py::handle elements, py::handle lambda) {
        const auto set = to_set(sys, elements);
        const auto sigma = spectral_measure(sys, set);
        const LatVec lam = to_vec(lambda);
        py::dict out;
        out["trivial"] = fraction(sigma.trivial_weight());
        out["total"] = fraction(sigma.total_mass());
        out["annihilator"] = fraction(sigma.annihilator_mass(lam));
        out["coset_formula"] = fraction(coset_annihilator_mass(sys, set, lam));
        return out;
      },
      py::arg("system"), py::arg("elements"), py::arg("lam"));
  m.def(
      "shrink_rational_spectrum",
      [](const FiniteSystem& sys, py::handle elements, py::handle eps_o) {
        const auto r = shrink_rational_spectrum(sys, to_set(sys, elements), to_rational(eps_o));
        py::dict out;
        out["n"] = from_int(r.n);
        out["nu_b"] = fraction(r.nu_b);
        out["c"] = fraction(r.c);
        out["rational_mass"] = fraction(r.rational_mass);
        out["component"] = r.component().support;
        return out;
      },
      py::arg("system"), py::arg("elements"), py::arg("eps_o"));

  // runner
  m.def("experiment_kinds", &cli::experiment_kinds);
  m.def(
      "run",
      [](const std::string& kind, const std::string& config, unsigned threads, std::optional<std::uint64_t> seed) {
        cli::Json cfg;
        try {
          cfg = cli::Json::parse(config);
        } catch (const cli::Json::parse_error& e) {
          throw cli::ConfigError(std::string("malformed JSON: ") + e.what());
        }
        cli::RunOutcome out;
        {
          py::gil_scoped_release release;
          out = cli::run_experiment(kind, cfg, cli::RunOptions{threads, seed});
        }
        return py::make_tuple(out.exit_code, out.report.dump(), cli::to_csv(out.table));
      },
      py::arg("kind"), py::arg("config"), py::arg("threads") = 1, py::arg("seed") = py::none(),
      "Runs an experiment from a JSON config string; returns (exit_code, report_json, csv).");
  m.def(
      "verify_report",
      [](const std::string& report) {
        cli::Json r;
        try {
          r = cli::Json::parse(report);
        } catch (const cli::Json::parse_error& e) {
          throw cli::ConfigError(std::string("malformed JSON: ") + e.what());
        }
        const auto out = cli::verify_report(r);
        return py::make_tuple(out.exit_code, out.report.dump());
      },
      py::arg("report"));
  m.def(
      "report_body", [](const std::string& report) { return cli::report_body(cli::Json::parse(report)).dump(); },
      py::arg("report"));
}
