#include "kdvlab/bottom.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/experiment.hpp"
#include "kdvlab/initial_data.hpp"
#include "kdvlab/lax.hpp"
#include "kdvlab/metrics.hpp"
#include "kdvlab/smoothing.hpp"
#include "kdvlab/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kdvlab;
using Eigen::VectorXd;

namespace {

RealField field(const VectorXd& u, double L) { return RealField(TorusGrid(L, static_cast<std::size_t>(u.size())), u); }

py::object to_python(const Json& j) {
  py::module_ json = py::module_::import("json");
  return json.attr("loads")(j.dump());
}

Json from_python(const py::object& o) {
  py::module_ json = py::module_::import("json");
  return Json::parse(json.attr("dumps")(o).cast<std::string>());
}

Trajectory trajectory_from(const std::vector<double>& times, const Eigen::MatrixXd& snaps, double L) {
  if (static_cast<std::size_t>(snaps.rows()) != times.size())
    throw Error(ErrorCode::InvalidArgument, "one snapshot row per time is required");
  Trajectory tr(TorusGrid(L, static_cast<std::size_t>(snaps.cols())));
  tr.times = times;
  for (Eigen::Index i = 0; i < snaps.rows(); ++i) tr.snapshots.emplace_back(tr.grid, VectorXd(snaps.row(i).transpose()));
  return tr;
}

py::dict trajectory_dict(const Trajectory& tr) {
  Eigen::MatrixXd snaps(static_cast<Eigen::Index>(tr.size()), static_cast<Eigen::Index>(tr.grid.points()));
  for (std::size_t i = 0; i < tr.size(); ++i) snaps.row(static_cast<Eigen::Index>(i)) = tr.snapshots[i].samples.transpose();
  std::vector<std::vector<double>> alpha;
  std::vector<double> mass;
  for (const auto& r : tr.records) {
    alpha.push_back(r.alpha);
    mass.push_back(r.mass);
  }
  py::dict d;
  d["times"] = tr.times;
  d["snapshots"] = snaps;
  d["dt"] = tr.dt;
  d["kappas"] = tr.kappas;
  d["alpha"] = alpha;
  d["mass"] = mass;
  d["diverged"] = tr.diverged;
  return d;
}

} // namespace

PYBIND11_MODULE(_kdvlab, m) {
  m.doc() = "Resolvent diagnostics and pseudospectral gKdV solver";
  py::register_exception<Error>(m, "KdvlabError", PyExc_RuntimeError);

  m.def("coordinates", [](double L, std::size_t N) { return TorusGrid(L, N).coordinates(); }, py::arg("L"), py::arg("N"));
  m.def("wavenumbers", [](double L, std::size_t N) { return TorusGrid(L, N).wavenumbers(); }, py::arg("L"), py::arg("N"));

  m.def("sobolev_kappa_norm", [](const VectorXd& u, double L, double s, double kappa) {
    return sobolev_kappa_norm(field(u, L), s, KappaParam(kappa));
  }, py::arg("u"), py::arg("L"), py::arg("s"), py::arg("kappa"));
  m.def("derivative", [](const VectorXd& u, double L, int order) { return derivative(field(u, L), order).samples; },
        py::arg("u"), py::arg("L"), py::arg("order") = 1);

  m.def("soliton", [](double L, std::size_t N, double c, double x0, double t) { return soliton(TorusGrid(L, N), c, x0, t).samples; },
        py::arg("L"), py::arg("N"), py::arg("c") = 1.0, py::arg("x0") = 0.0, py::arg("t") = 0.0);
  m.def("gaussian", [](double L, std::size_t N, double amplitude, double width, double center) {
    return gaussian(TorusGrid(L, N), amplitude, width, center).samples;
  }, py::arg("L"), py::arg("N"), py::arg("amplitude"), py::arg("width") = 1.0, py::arg("center") = 0.0);
  m.def("random_bandlimited", [](double L, std::size_t N, double kappa, double target_norm, std::uint64_t seed) {
    return random_bandlimited(TorusGrid(L, N), KappaParam(kappa), target_norm, seed).samples;
  }, py::arg("L"), py::arg("N"), py::arg("kappa"), py::arg("target_norm"), py::arg("seed"));

  m.def("greens_diagonal", [](const VectorXd& u, double L, double kappa, const std::string& method) {
    const RealField f = field(u, L);
    if (method == "series") return greens_diagonal_series(f, KappaParam(kappa)).g.samples;
    if (method != "direct") throw Error(ErrorCode::InvalidArgument, "method must be 'direct' or 'series'");
    return greens_diagonal_direct(f, KappaParam(kappa)).samples;
  }, py::arg("u"), py::arg("L"), py::arg("kappa"), py::arg("method") = "direct");
  m.def("rho_alpha", [](const VectorXd& u, double L, double kappa) {
    const GreensData d = rho_alpha(field(u, L), KappaParam(kappa));
    py::dict out;
    out["g"] = d.g.samples;
    out["rho"] = d.rho.samples;
    out["j"] = d.j.samples;
    out["alpha"] = d.alpha;
    return out;
  }, py::arg("u"), py::arg("L"), py::arg("kappa"));
  m.def("alpha", [](const VectorXd& u, double L, double kappa) { return alpha_value(field(u, L), KappaParam(kappa)); },
        py::arg("u"), py::arg("L"), py::arg("kappa"));
  m.def("microlaw_residual", [](const VectorXd& u, double L, double kappa) {
    const RealField f = field(u, L);
    return microlaw_residual(f, KappaParam(kappa), CoefficientSet(f.grid), 0.0);
  }, py::arg("u"), py::arg("L"), py::arg("kappa"));
  m.def("series_contraction_bound", [](const VectorXd& u, double L, double kappa) {
    return series_contraction_bound(field(u, L), KappaParam(kappa));
  }, py::arg("u"), py::arg("L"), py::arg("kappa"));

  m.def("hs_identity_error", [](const VectorXd& f, double L, double kappa) { return verify_hs_identity(field(f, L), KappaParam(kappa)); },
        py::arg("f"), py::arg("L"), py::arg("kappa"));
  m.def("commutator_norm", [](double L, std::size_t N, const std::string& variant, double kappa, int power) {
    return commutator_norm(TorusGrid(L, N), power, commutator_variant_from_string(variant), kappa);
  }, py::arg("L"), py::arg("N"), py::arg("variant"), py::arg("kappa"), py::arg("weight_power") = 1);
  m.def("commutator_scaling_audit", [](const std::string& variant, const std::vector<double>& kappas, double L, std::size_t N, int power) {
    return to_python(scaling_to_json(commutator_scaling_audit(power, commutator_variant_from_string(variant), kappas, AuditGrid{L, N})));
  }, py::arg("variant"), py::arg("kappas"), py::arg("L") = 100.0, py::arg("N") = 4096, py::arg("weight_power") = 1);

  m.def("solve_kdv", [](const VectorXd& u0, double L, double T, const std::vector<double>& kappas, double dt, std::size_t save_every) {
    const RealField f = field(u0, L);
    SolveOptions o;
    o.kappas = kappas;
    o.dt = dt;
    o.save_every = save_every;
    o.record_alpha = !kappas.empty();
    Trajectory tr = [&] {
      py::gil_scoped_release release;
      return solve(f, T, CoefficientSet(f.grid), o);
    }();
    return trajectory_dict(tr);
  }, py::arg("u0"), py::arg("L"), py::arg("T"), py::arg("kappas") = std::vector<double>{}, py::arg("dt") = 0.0,
     py::arg("save_every") = 0);

  m.def("ls_norm", [](const std::vector<double>& times, const Eigen::MatrixXd& snaps, double L, double kappa, std::size_t stride) {
    const Trajectory tr = trajectory_from(times, snaps, L);
    return ls_norm(tr, KappaParam(kappa), WeightFamily(tr.grid, stride));
  }, py::arg("times"), py::arg("snapshots"), py::arg("L"), py::arg("kappa"), py::arg("stride") = 4);
  m.def("local_mass", [](const std::vector<double>& times, const Eigen::MatrixXd& snaps, double L, std::size_t stride) {
    return local_mass(trajectory_from(times, snaps, L), stride);
  }, py::arg("times"), py::arg("snapshots"), py::arg("L"), py::arg("stride") = 4);

  m.def("synth_coefficients", [](const VectorXd& c, double L) {
    const BottomProfile prof(field(c, L));
    const SynthesizedCoefficients s = synth_fields(prof);
    py::dict out;
    out["y"] = prof.y_grid().coordinates();
    out["y_length"] = prof.y_grid().length();
    out["a2"] = s.a2.samples;
    out["a3"] = s.a3.samples;
    out["a4"] = s.a4.samples;
    return out;
  }, py::arg("c"), py::arg("L"));
  m.def("sech2_bottom", [](double L, std::size_t N, double amplitude, double width) {
    return sech2_bottom(TorusGrid(L, N), amplitude, width).samples;
  }, py::arg("L"), py::arg("N"), py::arg("amplitude"), py::arg("width"));
  m.def("bottom_roundtrip_error", [](const VectorXd& c, double L, const VectorXd& v) {
    const BottomProfile prof(field(c, L));
    const RealField vf(prof.y_grid(), v);
    const RealField back = transform_backward(transform_forward(vf, 0.0, prof).field, 0.0, prof).field;
    return l2_norm(back - vf) / l2_norm(vf);
  }, py::arg("c"), py::arg("L"), py::arg("v"));

  m.def("validate_config", [](const py::object& cfg) {
    const ValidationResult v = validate_config(from_python(cfg));
    py::list errors;
    for (const auto& e : v.errors) errors.append(py::make_tuple(e.path, e.message));
    return py::make_tuple(v.ok() ? to_python(v.config) : py::none(), errors);
  }, py::arg("config"));
  m.def("config_hash", [](const py::object& cfg) { return config_hash(from_python(cfg)); }, py::arg("config"));
  m.def("run_experiment", [](const py::object& cfg, const std::string& out_dir) {
    const ValidationResult v = validate_config(from_python(cfg));
    if (!v.ok()) throw Error(ErrorCode::InvalidArgument, v.errors.front().path + ": " + v.errors.front().message);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(v.config, out_dir);
    }
    return to_python(summary_to_json(s));
  }, py::arg("config"), py::arg("out_dir"));
}
