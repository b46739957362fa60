#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finslerlab/catalog.hpp"
#include "finslerlab/report.hpp"

namespace py = pybind11;
using namespace finsler;

namespace {

Params to_params(const py::dict& d) {
  Params p;
  for (const auto& [k, v] : d) {
    const std::string key = py::cast<std::string>(k);
    if (py::isinstance<py::str>(v))
      p[key] = py::cast<std::string>(v);
    else if (py::isinstance<py::bool_>(v))
      throw Error(ErrorCode::InvalidConfig, "parameter '" + key + "' must be a number or a string");
    else if (py::isinstance<py::int_>(v) || py::isinstance<py::float_>(v))
      p[key] = py::cast<double>(v);
    else
      throw Error(ErrorCode::InvalidConfig, "parameter '" + key + "' must be a number or a string");
  }
  return p;
}

py::dict params_dict(const Params& p) {
  py::dict d;
  for (const auto& [k, v] : p) {
    if (const double* x = std::get_if<double>(&v))
      d[py::str(k)] = *x;
    else
      d[py::str(k)] = std::get<std::string>(v);
  }
  return d;
}

GridSpec grid_spec(int n_r, int n_s, std::optional<double> r_min, std::optional<double> r_max) {
  GridSpec g;
  g.n_r = n_r;
  g.n_s = n_s;
  g.r_min = r_min;
  g.r_max = r_max;
  return g;
}

Tolerances tolerances(const MetricProfile& prof, const std::optional<py::dict>& over) {
  Tolerances t = Tolerances::for_provenance(prof.provenance());
  if (!over) return t;
  for (const auto& [k, v] : *over) {
    const std::string key = py::cast<std::string>(k);
    const double x = py::cast<double>(v);
    if (!(x >= kMinTolerance)) throw Error(ErrorCode::InvalidConfig, "tolerance " + key + " below 1e-14");
    if (key == "scalar")
      t.scalar = x;
    else if (key == "constant")
      t.constant = x;
    else if (key == "K_spread")
      t.K_spread = x;
    else if (key == "douglas")
      t.douglas = x;
    else if (key == "flat")
      t.flat = x;
    else
      throw Error(ErrorCode::InvalidConfig, "unknown tolerance '" + key + "'");
  }
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvature and classification of spherically symmetric Finsler metrics";

  static py::exception<Error> exc(m, "FinslerError", PyExc_ValueError);
  // Raised with .code set to the error code name.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(exc.ptr())(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  py::class_<MetricProfile>(m, "Profile")
      .def_property_readonly("name", &MetricProfile::name)
      .def_property_readonly("params", [](const MetricProfile& p) { return params_dict(p.params()); })
      .def_property_readonly("domain", [](const MetricProfile& p) { return p.domain().describe(); })
      .def_property_readonly("provenance",
                             [](const MetricProfile& p) {
                               return p.provenance() == Provenance::ClosedForm ? "closed_form" : "quadrature";
                             })
      .def("phi", [](const MetricProfile& p, double r, double s) { return p.phi_value(RsPoint::make(r, s)); },
           py::arg("r"), py::arg("s"))
      .def(
          "phi_partials",
          [](const MetricProfile& p, double r, double s) {
            const Jet2 j = p.phi(RsPoint::make(r, s));
            std::vector<std::vector<double>> out;
            for (int n = 0; n <= Jet2::kMaxOrder; ++n) {
              std::vector<double> row;
              for (int k = 0; k <= n; ++k) row.push_back(j.partial(n - k, k));
              out.push_back(row);
            }
            return out;
          },
          py::arg("r"), py::arg("s"), "Rows by total order n: [d^n/dr^n, ..., d^n/ds^n].")
      .def("F", [](const MetricProfile& p, const std::vector<double>& x,
                   const std::vector<double>& y) { return eval_F(p, x, y); },
           py::arg("x"), py::arg("y"))
      .def("__repr__", [](const MetricProfile& p) { return "<Profile " + p.name() + ">"; });

  m.def(
      "entry",
      [](const std::string& id, const py::dict& params, const std::string& build) {
        if (build == "quadrature") return get_entry_quadrature(id, to_params(params)).profile;
        if (build != "closed") throw Error(ErrorCode::InvalidConfig, "build must be closed or quadrature");
        return get_entry(id, to_params(params)).profile;
      },
      py::arg("id"), py::arg("params") = py::dict(), py::arg("build") = "closed");

  m.def("_manifest_json", [] { return dump_json(manifest_json()); });

  m.def(
      "_family_profile",
      [](const std::string& config) { return build_from_config(parse_family_config(nlohmann::json::parse(config))); },
      py::arg("config_json"));

  m.def(
      "grid",
      [](const MetricProfile& p, int n_r, int n_s, std::optional<double> r_min, std::optional<double> r_max) {
        std::vector<std::pair<double, double>> out;
        for (const RsPoint& at : default_grid(p.domain(), grid_spec(n_r, n_s, r_min, r_max)))
          out.emplace_back(at.r, at.s);
        return out;
      },
      py::arg("profile"), py::arg("n_r") = 24, py::arg("n_s") = 24, py::arg("r_min") = py::none(),
      py::arg("r_max") = py::none());

  m.def(
      "spray",
      [](const MetricProfile& p, double r, double s) {
        const SprayData sd = compute_spray(p, RsPoint::make(r, s));
        py::dict d;
        d["P"] = sd.P.value();
        d["Q"] = sd.Q.value();
        return d;
      },
      py::arg("profile"), py::arg("r"), py::arg("s"));

  m.def(
      "curvature",
      [](const MetricProfile& p, double r, double s) {
        const CurvatureSample c = curvature_sample(p, RsPoint::make(r, s));
        py::dict d;
        d["phi"] = c.phi;
        d["Q"] = c.Q;
        d["R2"] = c.R2;
        auto opt = [](const std::optional<double>& v) -> py::object {
          return v ? py::object(py::float_(*v)) : py::object(py::none());
        };
        d["P"] = opt(c.P);
        d["R1"] = opt(c.R1);
        d["R3"] = opt(c.R3);
        d["R4"] = opt(c.R4);
        d["K"] = opt(c.K);
        return d;
      },
      py::arg("profile"), py::arg("r"), py::arg("s"));

  m.def(
      "_classify_json",
      [](const MetricProfile& p, int n_r, int n_s, std::optional<double> r_min, std::optional<double> r_max,
         std::optional<py::dict> tol) {
        const GridSpec gs = grid_spec(n_r, n_s, r_min, r_max);
        const auto grid = default_grid(p.domain(), gs);
        const Tolerances t = tolerances(p, tol);
        ClassificationReport rep;
        {
          py::gil_scoped_release release;
          rep = classify(p, grid, t);
        }
        return dump_json(report_to_json(rep, gs));
      },
      py::arg("profile"), py::arg("n_r") = 24, py::arg("n_s") = 24, py::arg("r_min") = py::none(),
      py::arg("r_max") = py::none(), py::arg("tolerances") = py::none());

  m.def(
      "geodesic",
      [](const MetricProfile& p, const std::vector<double>& x0, const std::vector<double>& y0, double t_end,
         double step) {
        const GeodesicResult res = integrate_geodesic(p, x0, y0, t_end, step);
        std::vector<double> t;
        std::vector<std::vector<double>> x, y;
        for (const auto& st : res.states) {
          t.push_back(st.t);
          x.push_back(st.x);
          y.push_back(st.y);
        }
        py::dict d;
        d["t"] = t;
        d["x"] = x;
        d["y"] = y;
        d["deviation"] = straightness_deviation(res.states);
        d["error_estimate"] = res.error_estimate;
        d["exited"] = res.exited;
        d["exit_reason"] = res.exit_reason;
        return d;
      },
      py::arg("profile"), py::arg("x0"), py::arg("y0"), py::arg("t_end") = 1.0, py::arg("step") = 1e-3);
}
