#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "roadgp/roadgp.hpp"

namespace py = pybind11;
using namespace roadgp;

namespace {

py::dict metrics_row(const MetricsRecord& r) {
  py::dict d;
  d["t"] = r.t;
  d["agent"] = r.agent;
  d["rmse"] = r.rmse;
  d["npll"] = r.npll;
  d["w2_to_centralized"] = r.w2_to_centralized ? py::cast(*r.w2_to_centralized) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_roadgp, m) {
  m.doc() = "Decentralized robust random-feature GP regression";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](Eigen::VectorXd lengthscales, double prior_variance, double obs_variance,
                       std::optional<double> temporal_lengthscale) {
             KernelSpec k;
             k.spatial_lengthscales = std::move(lengthscales);
             k.prior_variance = prior_variance;
             k.obs_variance = obs_variance;
             k.temporal_lengthscale = temporal_lengthscale;
             k.validate();
             return k;
           }),
           py::arg("lengthscales"), py::arg("prior_variance") = 1.0, py::arg("obs_variance") = 1.0,
           py::arg("temporal_lengthscale") = py::none())
      .def_readwrite("lengthscales", &KernelSpec::spatial_lengthscales)
      .def_readwrite("prior_variance", &KernelSpec::prior_variance)
      .def_readwrite("obs_variance", &KernelSpec::obs_variance)
      .def_readwrite("temporal_lengthscale", &KernelSpec::temporal_lengthscale)
      .def("evaluate", &KernelSpec::evaluate);

  py::class_<FeatureMap>(m, "FeatureMap")
      .def_property_readonly("frequencies", &FeatureMap::frequencies)
      .def_property_readonly("num_features", &FeatureMap::num_features)
      .def_property_readonly("feature_dim", &FeatureMap::feature_dim)
      .def_property_readonly("seed", &FeatureMap::seed);

  m.def("sample_frequencies", &sample_frequencies, py::arg("spec"), py::arg("num_features"), py::arg("input_dim"),
        py::arg("seed"));
  m.def("feature_map", &feature_map, py::arg("fm"), py::arg("x"));
  m.def("feature_matrix", &feature_matrix, py::arg("fm"), py::arg("X"), "2J x N; column i maps row i of X");

  py::class_<InfoState>(m, "InfoState")
      .def_readwrite("D", &InfoState::D)
      .def_readwrite("eta", &InfoState::eta)
      .def_readwrite("obs_variance", &InfoState::obs_variance)
      .def_readwrite("prior_variance", &InfoState::prior_variance)
      .def_property_readonly("dim", &InfoState::dim);

  py::class_<Increment>(m, "Increment")
      .def(py::init([](Eigen::MatrixXd P, Eigen::VectorXd s) { return Increment{std::move(P), std::move(s)}; }),
           py::arg("P"), py::arg("s"))
      .def_readwrite("P", &Increment::P)
      .def_readwrite("s", &Increment::s);

  m.def("prior_state", &prior_state, py::arg("spec"), py::arg("num_features"));
  m.def("compute_increment", &compute_increment, py::arg("Phi"), py::arg("y"), py::arg("obs_variance"));
  m.def("apply_increment", &apply_increment, py::arg("state"), py::arg("increment"));
  m.def(
      "posterior_moments",
      [](const InfoState& s) {
        const auto mo = posterior_moments(s);
        return py::make_tuple(mo.mean, mo.covariance);
      },
      py::arg("state"), "(mean, covariance)");
  m.def(
      "predict",
      [](const InfoState& s, const FeatureMap& fm, const Eigen::VectorXd& x) {
        const auto p = predict(s, fm, x);
        return py::make_tuple(p.mean, p.variance);
      },
      py::arg("state"), py::arg("fm"), py::arg("x"), "(mean, variance) including observation noise");
  m.def(
      "serialize_state",
      [](const InfoState& s) {
        std::ostringstream out;
        write_state(out, s);
        return py::bytes(out.str());
      },
      py::arg("state"));
  m.def(
      "deserialize_state",
      [](const py::bytes& b) {
        std::istringstream in{std::string(b)};
        return read_state(in);
      },
      py::arg("data"));

  m.def("huber_weight", &huber_weight, py::arg("e"), py::arg("delta") = 1.345);
  m.def("hampel_weight", &hampel_weight, py::arg("e"), py::arg("a") = 2.0, py::arg("b") = 4.0, py::arg("c") = 8.0);
  m.def("standardized_residuals", &standardized_residuals, py::arg("state"), py::arg("fm"), py::arg("X"),
        py::arg("y"));
  m.def("robust_increment", &robust_increment, py::arg("Phi"), py::arg("y"), py::arg("weights"),
        py::arg("obs_variance"));

  m.def(
      "apply_forgetting",
      [](InfoState s, const std::string& mode, double nu) {
        DynamicsConfig cfg;
        if (mode == "static") cfg.mode = DynamicsMode::static_model;
        else if (mode == "b2p") cfg.mode = DynamicsMode::b2p;
        else if (mode == "ui") cfg.mode = DynamicsMode::ui;
        else if (mode == "spatiotemporal") cfg.mode = DynamicsMode::spatiotemporal;
        else throw InvalidArgument("unknown dynamics mode '" + mode + "'");
        cfg.nu = nu;
        return apply_forgetting(std::move(s), cfg);
      },
      py::arg("state"), py::arg("mode"), py::arg("nu"));

  py::enum_<TopologyKind>(m, "TopologyKind")
      .value("ring", TopologyKind::ring)
      .value("complete", TopologyKind::complete)
      .value("grid", TopologyKind::grid)
      .value("custom", TopologyKind::custom);
  py::enum_<WeightRule>(m, "WeightRule")
      .value("metropolis", WeightRule::metropolis)
      .value("lazy_metropolis", WeightRule::lazy_metropolis);
  py::class_<Topology>(m, "Topology")
      .def_property_readonly("num_agents", &Topology::num_agents)
      .def("degree", &Topology::degree)
      .def("neighbors", &Topology::neighbors);
  m.def("build_topology", &build_topology, py::arg("kind"), py::arg("num_agents"),
        py::arg("edges") = std::vector<std::pair<int, int>>{});
  m.def("mixing_matrix", &mixing_matrix, py::arg("topology"), py::arg("rule") = WeightRule::metropolis);
  m.def(
      "consensus_sum",
      [](const std::vector<Eigen::VectorXd>& values, const Topology& topo, int rounds, WeightRule rule) {
        return consensus_sum(values, topo, ConsensusConfig{rounds, rule});
      },
      py::arg("values"), py::arg("topology"), py::arg("rounds"), py::arg("rule") = WeightRule::metropolis);

  m.def("softmax", &softmax, py::arg("logits"));
  m.def("rmse", &rmse, py::arg("predicted"), py::arg("truth"));
  m.def("wasserstein2_gaussians", &wasserstein2_gaussians, py::arg("mu1"), py::arg("sigma1"), py::arg("mu2"),
        py::arg("sigma2"));

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("num_agents", &Scenario::num_agents)
      .def("resolved", [](const Scenario& s) {
        std::ostringstream out;
        write_scenario(out, s);
        return out.str();
      });
  m.def(
      "parse_scenario",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        std::istringstream in(text);
        return parse_scenario(in, overrides);
      },
      py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
  m.def("load_scenario", &load_scenario, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "run_scenario",
      [](const Scenario& s, std::optional<std::filesystem::path> snapshot_dir) {
        RunOptions opt;
        opt.snapshot_dir = std::move(snapshot_dir);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(s, opt);
        }
        py::list rows;
        for (const auto& rec : r.metrics) rows.append(metrics_row(rec));
        return rows;
      },
      py::arg("scenario"), py::arg("snapshot_dir") = py::none(), "Runs the epoch loop; returns metrics rows as dicts");
}
