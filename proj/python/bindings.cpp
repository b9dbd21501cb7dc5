#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "ctri/analysis.hpp"
#include "ctri/consistency.hpp"
#include "ctri/errors.hpp"
#include "ctri/simulate.hpp"
#include "ctri/triangulators.hpp"
#include "ctri/version.hpp"

namespace py = pybind11;

namespace {

using namespace ctri;

int parse_q(const py::object& q) {
  if (py::isinstance<py::str>(q)) {
    if (q.cast<std::string>() == "inf") return kInfNorm;
    throw ConfigError("q must be 1, 2 or 'inf'");
  }
  const double v = q.cast<double>();
  if (std::isinf(v)) return kInfNorm;
  if (v == 1.0) return 1;
  if (v == 2.0) return 2;
  throw ConfigError("q must be 1, 2 or 'inf'");
}

using PyObservation = std::pair<Camera, std::pair<double, double>>;

Instance build_instance(const std::vector<PyObservation>& observations,
                        const py::object& q, double delta) {
  Instance inst;
  inst.noise.q = parse_q(q);
  inst.noise.delta = delta;
  inst.observations.reserve(observations.size());
  for (const PyObservation& o : observations)
    inst.observations.push_back({Vec2{o.second.first, o.second.second},
                                 o.first});
  validate(inst);
  return inst;
}

py::dict result_dict(const TriangulationResult& res) {
  py::dict d;
  d["X"] = py::make_tuple(res.X.x, res.X.y, res.X.z);
  d["algorithm"] = res.algorithm;
  d["iterations"] = res.iterations;
  d["objective"] =
      res.has_objective ? py::cast(res.objective) : py::none();
  d["consistent"] = res.consistent;
  d["converged"] = res.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ctri, m) {
  m.doc() = "bounded-noise consistent multi-view triangulation";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError",
                                          PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_RuntimeError);

  py::class_<Camera>(m, "Camera")
      .def_readonly("f", &Camera::f)
      .def_property_readonly(
          "principal",
          [](const Camera& c) {
            return py::make_tuple(c.principal.x, c.principal.y);
          })
      .def_property_readonly(
          "C",
          [](const Camera& c) { return py::make_tuple(c.C.x, c.C.y, c.C.z); })
      .def_property_readonly("R", [](const Camera& c) {
        py::list rows;
        for (int r = 0; r < 3; ++r)
          rows.append(py::make_tuple(c.R(r, 0), c.R(r, 1), c.R(r, 2)));
        return rows;
      });

  m.def(
      "make_camera",
      [](double f, std::pair<double, double> principal,
         std::array<double, 9> R, std::array<double, 3> C) {
        Mat3 rot;
        rot.m = R;
        return make_camera(f, Vec2{principal.first, principal.second}, rot,
                           Vec3{C[0], C[1], C[2]});
      },
      py::arg("f"), py::arg("principal"), py::arg("R"), py::arg("C"),
      "Calibrated pinhole camera from focal length, principal point, "
      "row-major rotation and centre.");

  m.def(
      "project",
      [](const Camera& cam, std::array<double, 3> X) {
        const Vec2 x = project(cam, Vec3{X[0], X[1], X[2]});
        return py::make_tuple(x.x, x.y);
      },
      py::arg("camera"), py::arg("X"));

  m.def(
      "in_consistent_region",
      [](std::array<double, 3> X,
         const std::vector<PyObservation>& observations, const py::object& q,
         double delta) {
        return in_consistent_region(Vec3{X[0], X[1], X[2]},
                                    build_instance(observations, q, delta));
      },
      py::arg("X"), py::arg("observations"), py::arg("q"), py::arg("delta"));

  m.def(
      "triangulate",
      [](const std::string& algorithm,
         const std::vector<PyObservation>& observations, const py::object& q,
         double delta) {
        return result_dict(
            run_algorithm(algorithm, build_instance(observations, q, delta)));
      },
      py::arg("algorithm"), py::arg("observations"), py::arg("q"),
      py::arg("delta"),
      "Runs one of: linear, l2-refined, consistent-lp, avg-distance-lp, "
      "minimax-linf, minimax-l2.");

  m.def(
      "run_decay_experiment",
      [](const std::string& algorithm, const std::string& setup,
         double roi_radius, double outer_radius, std::vector<int> schedule,
         int trials_per_m, const py::object& q, double delta,
         double focal_length, double sensor_halfwidth, std::uint64_t seed) {
        ExperimentConfig cfg;
        if (setup == "RandomSphere")
          cfg.setup = Setup::RandomSphere;
        else if (setup == "CircularArray")
          cfg.setup = Setup::CircularArray;
        else
          throw ConfigError("setup must be RandomSphere or CircularArray");
        cfg.roi_radius = roi_radius;
        cfg.outer_radius = outer_radius;
        cfg.camera_count_schedule = std::move(schedule);
        cfg.trials_per_m = trials_per_m;
        cfg.noise.q = parse_q(q);
        cfg.noise.delta = delta;
        cfg.focal_length = focal_length;
        cfg.sensor_halfwidth = sensor_halfwidth;
        cfg.rng_seed = seed;
        const DecayCurve curve = run_decay_experiment(cfg, algorithm);
        py::list rows;
        for (const DecayPoint& pt : curve.points) {
          py::dict d;
          d["M"] = pt.m;
          d["mean_sq_err"] = pt.mean_sq_err;
          d["stderr"] = pt.std_error;
          d["trials"] = pt.trials;
          d["excluded"] = pt.excluded;
          rows.append(d);
        }
        return rows;
      },
      py::arg("algorithm"), py::arg("setup") = "RandomSphere",
      py::arg("roi_radius") = 1.0, py::arg("outer_radius") = 10.0,
      py::arg("schedule") = std::vector<int>{4, 8, 16, 32, 64, 128, 256},
      py::arg("trials_per_m") = 200, py::arg("q") = "inf",
      py::arg("delta") = 0.01, py::arg("focal_length") = 1.0,
      py::arg("sensor_halfwidth") = 2.0, py::arg("seed") = 0);

  m.def(
      "fit_loglog_slope",
      [](const std::vector<std::pair<int, double>>& points, int m_min,
         py::object m_max) {
        DecayCurve curve;
        for (const auto& p : points) {
          DecayPoint pt;
          pt.m = p.first;
          pt.mean_sq_err = p.second;
          curve.points.push_back(pt);
        }
        const int hi = m_max.is_none() ? std::numeric_limits<int>::max()
                                       : m_max.cast<int>();
        const SlopeFit fit = fit_loglog_slope(curve, m_min, hi);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["residual_rms"] = fit.residual_rms;
        d["m_min"] = fit.m_min;
        d["m_max"] = fit.m_max;
        d["points_used"] = fit.points_used;
        d["points_dropped"] = fit.points_dropped;
        return d;
      },
      py::arg("points"), py::arg("m_min") = 8, py::arg("m_max") = py::none(),
      "Ordinary least squares on (log10 M, log10 error).");

  m.def("lower_bound_reference", &lower_bound_reference, py::arg("m"),
        py::arg("n"), py::arg("vol_roi"),
        "Volume-argument floor on the mean squared error.");
}
