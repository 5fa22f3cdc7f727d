#include "barn/bench.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace barn;

namespace {

nlohmann::json to_nlohmann(const py::handle& obj) {
  auto json = py::module_::import("json");
  return nlohmann::json::parse(py::cast<std::string>(json.attr("dumps")(obj)));
}

py::object from_nlohmann(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict trace_dict(const sampler::Trace& t) {
  py::dict d;
  d["phi"] = t.phi;
  d["sigma"] = t.sigma_path;
  d["neuron_counts"] = t.neuron_counts;
  d["accept"] = t.accept_flags;
  return d;
}

sampler::SamplerConfig sampler_config(const py::dict& kw) {
  sampler::SamplerConfig c;
  for (auto [k, v] : kw) {
    const auto key = py::cast<std::string>(k);
    if (key == "n_networks") c.n_networks = py::cast<int>(v);
    else if (key == "grow_prob") c.grow_prob = py::cast<double>(v);
    else if (key == "prior_mean") c.prior_mean = py::cast<double>(v);
    else if (key == "max_iter") c.max_iter = py::cast<int>(v);
    else if (key == "min_iter") c.min_iter = py::cast<int>(v);
    else if (key == "check_every") c.check_every = py::cast<int>(v);
    else if (key == "tol") c.tol = py::cast<double>(v);
    else if (key == "stop_rule") c.stop_rule = sampler::parse_stop_rule(py::cast<std::string>(v));
    else if (key == "nu") c.sigma_prior.nu = py::cast<double>(v);
    else if (key == "quantile") c.sigma_prior.quantile = py::cast<double>(v);
    else if (key == "seed") c.seed = py::cast<std::uint64_t>(v);
    else if (key == "activation") c.activation = nn::parse_activation(py::cast<std::string>(v));
    else if (key == "l2_penalty") c.loss.l2_penalty = py::cast<double>(v);
    else if (key == "bfgs_max_iter") c.optim.max_iter = py::cast<int>(v);
    else if (key == "keep_last") c.keep_last = py::cast<int>(v);
    else throw py::key_error("unknown sampler option '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_barn, m) {
  m.doc() = "Bayesian additive regression networks.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<data::DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0);

  // nn
  py::enum_<nn::Activation>(m, "Activation")
      .value("sigmoid", nn::Activation::Sigmoid)
      .value("relu", nn::Activation::ReLU);

  py::class_<nn::SingleLayerNet>(m, "SingleLayerNet")
      .def(py::init<Matrix, Vector, Vector, double, nn::Activation>(), py::arg("w_in"), py::arg("b_in"),
           py::arg("w_out"), py::arg("b_out"), py::arg("activation") = nn::Activation::Sigmoid)
      .def_static("zeros", &nn::SingleLayerNet::zeros, py::arg("inputs"), py::arg("neurons"),
                  py::arg("activation") = nn::Activation::Sigmoid)
      .def_static("random", &nn::SingleLayerNet::random, py::arg("inputs"), py::arg("neurons"),
                  py::arg("activation"), py::arg("rng"))
      .def_property_readonly("inputs", &nn::SingleLayerNet::inputs)
      .def_property_readonly("neurons", &nn::SingleLayerNet::neurons)
      .def_property_readonly("activation", &nn::SingleLayerNet::activation)
      .def_property_readonly("w_in", &nn::SingleLayerNet::w_in)
      .def_property_readonly("b_in", &nn::SingleLayerNet::b_in)
      .def_property_readonly("w_out", &nn::SingleLayerNet::w_out)
      .def_property_readonly("b_out", &nn::SingleLayerNet::b_out)
      .def_property_readonly("parameter_count",
                             py::overload_cast<>(&nn::SingleLayerNet::parameter_count, py::const_))
      .def("__call__", [](const nn::SingleLayerNet& n, const Matrix& X) { return nn::forward(n, X); })
      .def("__eq__", &nn::SingleLayerNet::operator==)
      .def("__repr__", [](const nn::SingleLayerNet& n) {
        return "<SingleLayerNet inputs=" + std::to_string(n.inputs()) + " neurons=" + std::to_string(n.neurons()) +
               " activation=" + std::string(nn::to_string(n.activation())) + ">";
      });

  m.def("forward", &nn::forward, py::arg("net"), py::arg("X"));
  m.def("loss", [](const nn::SingleLayerNet& n, const Matrix& X, const Vector& r, double l2) {
    return nn::loss(n, X, r, nn::LossConfig{l2});
  }, py::arg("net"), py::arg("X"), py::arg("r"), py::arg("l2_penalty") = 0.001);
  m.def("gradient", [](const nn::SingleLayerNet& n, const Matrix& X, const Vector& r, double l2) {
    return nn::gradient(n, X, r, nn::LossConfig{l2});
  }, py::arg("net"), py::arg("X"), py::arg("r"), py::arg("l2_penalty") = 0.001);
  m.def("pack", &nn::pack);
  m.def("unpack", &nn::unpack, py::arg("flat"), py::arg("inputs"), py::arg("neurons"),
        py::arg("activation") = nn::Activation::Sigmoid);
  m.def("grow", &nn::grow, py::arg("net"), py::arg("rng"));
  m.def("shrink", &nn::shrink);

  // optim
  m.def("minimize", [](const std::function<double(const Vector&)>& f,
                       const std::function<Vector(const Vector&)>& g, const Vector& x0, int max_iter,
                       double grad_tol) {
    optim::OptimConfig cfg;
    cfg.max_iter = max_iter;
    cfg.grad_tol = grad_tol;
    const auto r = optim::minimize(f, g, x0, cfg);
    return py::make_tuple(r.x, r.f, r.iterations, std::string(optim::to_string(r.status)));
  }, py::arg("f"), py::arg("g"), py::arg("x0"), py::arg("max_iter") = 100, py::arg("grad_tol") = 1e-5);
  m.def("train", [](const nn::SingleLayerNet& n, const Matrix& X, const Vector& r, int max_iter, double l2) {
    optim::OptimConfig cfg;
    cfg.max_iter = max_iter;
    return optim::train(n, X, r, cfg, nn::LossConfig{l2}).net;
  }, py::arg("net"), py::arg("X"), py::arg("r"), py::arg("max_iter") = 100, py::arg("l2_penalty") = 0.001);

  // sampler
  m.def("propose", [](int mm, double p, Rng& rng) {
    const auto pr = sampler::propose(mm, p, rng);
    return py::make_tuple(pr.neurons, pr.log_transition_ratio);
  }, py::arg("m"), py::arg("grow_prob"), py::arg("rng"));
  m.def("log_prior_ratio", &sampler::log_prior_ratio, py::arg("m_new"), py::arg("m_old"), py::arg("prior_mean"));
  m.def("log_evidence", py::overload_cast<const Vector&, const Vector&, double>(&sampler::log_evidence),
        py::arg("r"), py::arg("predicted"), py::arg("sigma"));
  m.def("log_acceptance", &sampler::log_acceptance);
  m.def("sample_sigma", &sampler::sample_sigma, py::arg("residuals"), py::arg("nu"), py::arg("scale"),
        py::arg("rng"));
  m.def("calibrate_sigma_prior", py::overload_cast<double, double, double>(&sampler::calibrate_sigma_prior),
        py::arg("sigma_hat"), py::arg("nu") = 3.0, py::arg("quantile") = 0.9);
  m.def("batch_means_check", [](const std::vector<double>& phi, int b, double ref) {
    const auto r = sampler::batch_means_check(phi, b, ref);
    return py::make_tuple(r.batch_variance, r.ok);
  });

  py::class_<sampler::Ensemble>(m, "Ensemble")
      .def_readonly("nets", &sampler::Ensemble::nets)
      .def_readonly("sigma", &sampler::Ensemble::sigma)
      .def("predict", &sampler::Ensemble::predict)
      .def_property_readonly("neuron_counts", &sampler::Ensemble::neuron_counts)
      .def_property_readonly("total_neurons", &sampler::Ensemble::total_neurons);

  m.def("run_barn", [](const Matrix& X, const Vector& y, const Matrix& Xv, const Vector& yv, py::kwargs kw) {
    const auto cfg = sampler_config(kw);
    sampler::BarnResult res;
    {
      py::gil_scoped_release release;
      res = sampler::run_barn(X, y, Xv, yv, cfg);
    }
    return py::make_tuple(res.ensemble, trace_dict(res.trace), res.posterior);
  }, py::arg("X_train"), py::arg("y_train"), py::arg("X_val"), py::arg("y_val"),
     "Returns (ensemble, trace, posterior). Keyword arguments set sampler options.");

  // data
  py::class_<data::Dataset>(m, "Dataset")
      .def_readonly("name", &data::Dataset::name)
      .def_readonly("X", &data::Dataset::X)
      .def_readonly("y", &data::Dataset::y)
      .def_readonly("feature_names", &data::Dataset::feature_names)
      .def_readonly("target_name", &data::Dataset::target_name);

  m.def("load_csv", &data::load_csv, py::arg("path"), py::arg("target"));
  m.def("write_csv", &data::write_csv, py::arg("dataset"), py::arg("path"));
  m.def("synth", [](const py::dict& spec) { return data::generate(bench::synth_spec_from_json(to_nlohmann(spec))).data; },
        py::arg("spec"), "Generates a synthetic dataset from a spec dict (same keys as the JSON spec).");
  m.def("friedman1", [](const std::array<double, 5>& x) { return data::friedman1(x.data()); });
  m.def("friedman2", [](const std::array<double, 4>& x) { return data::friedman2(x.data()); });
  m.def("friedman3", [](const std::array<double, 4>& x) { return data::friedman3(x.data()); });

  // baselines
  m.def("ols_fit", [](const Matrix& X, const Vector& y) { return baselines::ols_fit(X, y).coefficients; },
        "Returns slopes followed by the intercept.");
  m.def("ols_predict", [](const Vector& coef, const Matrix& X) { return baselines::ols_predict({coef}, X); });
  m.def("bignn_fit", [](const Matrix& X, const Vector& y, int total_neurons, int multiplier, double lr, int epochs,
                        const std::string& activation, std::uint64_t seed) {
    baselines::BigNNConfig cfg;
    cfg.neuron_multiplier = multiplier;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.activation = nn::parse_activation(activation);
    cfg.seed = seed;
    const auto r = baselines::bignn_fit(X, y, total_neurons, cfg);
    return py::make_tuple(r.net, r.final_loss, r.finite);
  }, py::arg("X"), py::arg("y"), py::arg("total_neurons"), py::arg("multiplier") = 1, py::arg("learning_rate") = 1e-4,
     py::arg("epochs") = 2000, py::arg("activation") = "sigmoid", py::arg("seed") = 0);

  // bench
  m.def("metrics", [](const Vector& y, const Vector& p) {
    const auto r = bench::metrics(y, p);
    return py::make_tuple(r.rmse, r.r2 ? py::cast(*r.r2) : py::none());
  });
  m.def("relative_rmse", &bench::relative_rmse);
  m.def("pooled_std", &bench::pooled_std);
  m.def("run", [](const py::dict& spec, const std::string& methods, int trials, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out, py::kwargs kw) {
    bench::RunOptions opts;
    opts.methods = bench::parse_methods(methods);
    opts.n_trials = trials;
    opts.seed = seed;
    opts.barn = sampler_config(kw);
    const auto source = bench::DatasetSource::from_synth(bench::synth_spec_from_json(to_nlohmann(spec)));
    std::vector<bench::TrialReport> reports;
    {
      py::gil_scoped_release release;
      reports = bench::run_trials(source, opts);
      if (out) bench::emit_report(reports, opts, *out);
    }
    return from_nlohmann(bench::report_json(reports, opts));
  }, py::arg("spec"), py::arg("methods") = "barn,ols", py::arg("trials") = 1, py::arg("seed") = 0,
     py::arg("out") = py::none(), "Runs trials on a synthetic spec and returns the JSON report as a dict.");
  m.attr("REPORT_SCHEMA_VERSION") = bench::kReportSchemaVersion;
}
