// barn: command-line front end for the BARN library.
//
//   barn run   --data <csv|spec.json> [--target col] --methods barn,ols --trials 40 --seed 0 --out dir
//   barn synth --spec spec.json --out data.csv
//   barn trace [--data <csv|spec.json>] [--target col] --seed 0 --out trace.csv

#include "barn/bench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using barn::bench::DatasetSource;

struct SamplerFlags {
  int n_networks = 10;
  double prior_mean = 1.0;
  double grow_prob = 0.4;
  int max_iter = 200;
  int min_iter = 20;
  std::string activation = "sigmoid";
  std::string stop_rule = "worse_than_best";

  void add(CLI::App* cmd) {
    cmd->add_option("--n-networks", n_networks, "Networks in the ensemble")->capture_default_str();
    cmd->add_option("--prior-mean", prior_mean, "Poisson mean of the neuron-count prior")
        ->capture_default_str();
    cmd->add_option("--grow-prob", grow_prob, "Probability of proposing a grow move")
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "MCMC iteration cap")->capture_default_str();
    cmd->add_option("--min-iter", min_iter, "Iterations before early stopping may fire")
        ->capture_default_str();
    cmd->add_option("--activation", activation, "sigmoid or relu")->capture_default_str();
    cmd->add_option("--stop-rule", stop_rule, "worse_than_best or no_improvement")
        ->capture_default_str();
  }

  barn::sampler::SamplerConfig config() const {
    barn::sampler::SamplerConfig c;
    c.n_networks = n_networks;
    c.prior_mean = prior_mean;
    c.grow_prob = grow_prob;
    c.max_iter = max_iter;
    c.min_iter = min_iter;
    c.activation = barn::nn::parse_activation(activation);
    c.stop_rule = barn::sampler::parse_stop_rule(stop_rule);
    c.validate();
    return c;
  }
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw barn::data::FileNotFoundError("cannot open " + path);
  return nlohmann::json::parse(in);
}

DatasetSource source_for(const std::string& data, const std::string& target,
                         const std::string& name) {
  if (data.size() > 5 && data.substr(data.size() - 5) == ".json") {
    auto src = DatasetSource::from_synth(barn::bench::synth_spec_from_json(read_json(data)));
    if (!name.empty()) src.name = name;
    return src;
  }
  if (target.empty()) throw CLI::ValidationError("--target", "required for CSV input");
  return DatasetSource::from_csv(data, target, name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian additive regression networks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a multi-trial benchmark and write reports");
  std::string data;
  std::string target;
  std::string name;
  std::string methods = "barn,ols";
  int trials = 40;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  int cv_folds = 5;
  bool whiten = false;
  SamplerFlags run_flags;
  run->add_option("--data", data, "CSV file or synthetic spec (.json)")->required();
  run->add_option("--target", target, "Target column for CSV input");
  run->add_option("--name", name, "Dataset name used in reports");
  run->add_option("--methods", methods, "barn,barn-cv,ols,bignn,bignn-cv")->capture_default_str();
  run->add_option("--trials", trials, "Number of random splits")->capture_default_str();
  run->add_option("--seed", seed, "Base seed; trial t uses seed + t")->capture_default_str();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--threads", threads, "Worker threads (default: BARN_THREADS or all cores)");
  run->add_option("--cv-folds", cv_folds, "Folds for the -cv methods")->capture_default_str();
  run->add_flag("--whiten", whiten, "Scale principal components to unit variance");
  run_flags.add(run);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
  std::string spec_path;
  std::string synth_out;
  synth->add_option("--spec", spec_path, "Synthetic spec (.json)")->required();
  synth->add_option("--out", synth_out, "Output CSV")->required();

  // trace
  auto* trace = app.add_subcommand("trace", "Run BARN once and write its per-iteration trace");
  std::string trace_data;
  std::string trace_target;
  std::string trace_out;
  std::uint64_t trace_seed = 0;
  bool trace_whiten = false;
  SamplerFlags trace_flags;
  trace->add_option("--data", trace_data,
                    "CSV file or synthetic spec (.json); default: the random benchmark");
  trace->add_option("--target", trace_target, "Target column for CSV input");
  trace->add_option("--seed", trace_seed, "Split and sampler seed")->capture_default_str();
  trace->add_option("--out", trace_out, "Output CSV")->required();
  trace->add_flag("--whiten", trace_whiten, "Scale principal components to unit variance");
  trace_flags.add(trace);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      barn::bench::RunOptions opts;
      opts.methods = barn::bench::parse_methods(methods);
      opts.n_trials = trials;
      opts.seed = seed;
      opts.threads = threads;
      opts.cv_folds = cv_folds;
      opts.whiten = whiten;
      opts.barn = run_flags.config();
      const auto src = source_for(data, target, name);
      const auto reports = barn::bench::run_trials(src, opts);
      barn::bench::emit_report(reports, opts, out);
      const auto summary = barn::bench::report_json(reports, opts)["summary"];
      for (const auto& row : summary) {
        std::cout << row["dataset"].get<std::string>() << "  " << row["method"].get<std::string>()
                  << "  mean test RMSE " << row["mean_test_rmse"].dump() << "  ("
                  << row["n_ok"].get<int>() << " ok)\n";
      }
      std::cout << "reports written to " << out << '\n';
    } else if (*synth) {
      const auto spec = barn::bench::synth_spec_from_json(read_json(spec_path));
      barn::data::write_csv(barn::data::generate(spec).data, synth_out);
    } else if (*trace) {
      barn::bench::RunOptions opts;
      opts.whiten = trace_whiten;
      const auto raw = trace_data.empty()
                           ? barn::data::generate(barn::data::random_benchmark_spec()).data
                           : source_for(trace_data, trace_target, "").load();
      const auto ds = barn::bench::prepare_trial(raw, trace_seed, opts);
      auto cfg = trace_flags.config();
      cfg.seed = trace_seed;
      const auto res = barn::sampler::run_barn(ds, cfg);
      std::ofstream f(trace_out);
      if (!f) throw std::runtime_error("cannot write " + trace_out);
      res.trace.write_csv(f);
    }
  } catch (const std::exception& e) {
    std::cerr << "barn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
