#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sldsmbc/forecast.hpp"
#include "sldsmbc/io.hpp"
#include "sldsmbc/mbc.hpp"

namespace sldsmbc {

namespace {

// derived CSV path next to `path`: stem + suffix + ".csv"
std::string stem_with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.rfind('.');
  const std::size_t slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix + ".csv";
  return path.substr(0, dot) + suffix + ".csv";
}

std::string fnv1a_hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (f.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct HyperFlags {
  double lambda = 1.0;
  double psi = 1.0;
  double kappa = 50.0;
  int truncation = 20;
  int ar_order = 2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "transition DP concentration")->check(CLI::PositiveNumber);
    cmd->add_option("--psi", psi, "top-level DP concentration")->check(CLI::PositiveNumber);
    cmd->add_option("--kappa", kappa, "sticky self-transition bias")->check(CLI::NonNegativeNumber);
    cmd->add_option("--truncation", truncation, "weak-limit mode budget")->check(CLI::PositiveNumber);
    cmd->add_option("--ar-order", ar_order, "AR order of the mode dynamics")->check(CLI::PositiveNumber);
  }

  HdpHyperParams to_hypers() const {
    HdpHyperParams hp;
    hp.lambda = lambda;
    hp.psi = psi;
    hp.kappa = kappa;
    hp.truncation = truncation;
    hp.ar_order = ar_order;
    return hp;
  }
};

void write_diag_csv(const FitDiagnostics& diag, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "sweep,occupied_modes,joint_log_lik\n";
  for (std::size_t i = 0; i < diag.occupied_modes.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", diag.joint_log_lik[i]);
    f << (i + 1) << ',' << diag.occupied_modes[i] << ',' << buf << '\n';
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Switching-AR HDP-HMM driver behavior modeling and model-based-communication simulation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic trip CSV plus truth labels");
  int sy_modes = 3, sy_steps = 2000, sy_segment = 200, sy_ar = 2, sy_dim = 1;
  double sy_noise = 0.05;
  std::uint64_t sy_seed = 0;
  std::string sy_out, sy_labels_out;
  synth->add_option("--modes", sy_modes)->check(CLI::PositiveNumber);
  synth->add_option("--steps", sy_steps)->check(CLI::PositiveNumber);
  synth->add_option("--segment-len", sy_segment)->check(CLI::PositiveNumber);
  synth->add_option("--noise", sy_noise)->check(CLI::NonNegativeNumber);
  synth->add_option("--ar-order", sy_ar)->check(CLI::PositiveNumber);
  synth->add_option("--dim", sy_dim)->check(CLI::PositiveNumber);
  synth->add_option("--seed", sy_seed);
  synth->add_option("--out", sy_out)->required();
  synth->add_option("--labels-out", sy_labels_out);

  // fit
  auto* fitc = app.add_subcommand("fit", "fit a model snapshot to a trip CSV");
  HyperFlags fit_hp;
  fit_hp.attach(fitc);
  std::string fit_in, fit_out, fit_labels_out, fit_diag_out;
  int fit_sweeps = 500, fit_burn = 300;
  std::uint64_t fit_seed = 0;
  fitc->add_option("--in", fit_in)->required();
  fitc->add_option("--out", fit_out)->required();
  fitc->add_option("--labels-out", fit_labels_out);
  fitc->add_option("--diag-out", fit_diag_out);
  fitc->add_option("--sweeps", fit_sweeps)->check(CLI::PositiveNumber);
  fitc->add_option("--burn-in", fit_burn)->check(CLI::NonNegativeNumber);
  fitc->add_option("--seed", fit_seed);

  // forecast
  auto* fc = app.add_subcommand("forecast", "k-step forecast beyond the end of a trip");
  std::string fc_snapshot, fc_in, fc_out;
  int fc_horizon = 10;
  fc->add_option("--snapshot", fc_snapshot)->required();
  fc->add_option("--in", fc_in)->required();
  fc->add_option("--horizon", fc_horizon)->check(CLI::PositiveNumber);
  fc->add_option("--out", fc_out)->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the lossy-channel scenario on a trip");
  HyperFlags sim_hp;
  sim_hp.attach(sim);
  std::string sim_in, sim_out, sim_horizon = "auto";
  double sim_per = 0.6, sim_tx_hz = 10.0;
  int sim_refit = 600, sim_sweeps = 150, sim_burn = 100;
  std::uint64_t sim_seed = 0, sim_fit_seed = 1;
  sim->add_option("--in", sim_in)->required();
  sim->add_option("--out", sim_out)->required();
  sim->add_option("--per", sim_per)->check(CLI::Range(0.0, 1.0));
  sim->add_option("--seed", sim_seed, "channel seed");
  sim->add_option("--fit-seed", sim_fit_seed);
  sim->add_option("--refit-window", sim_refit)->check(CLI::PositiveNumber);
  sim->add_option("--tx-hz", sim_tx_hz)->check(CLI::PositiveNumber);
  sim->add_option("--sweeps", sim_sweeps)->check(CLI::PositiveNumber);
  sim->add_option("--burn-in", sim_burn)->check(CLI::NonNegativeNumber);
  sim->add_option("--horizon", sim_horizon, "forecast horizon: `auto` (until next delivery) or a fixed k");

  // report
  auto* rep = app.add_subcommand("report", "aggregate SimTrace CSVs into an ECDF CSV");
  std::string rep_out;
  std::vector<std::string> rep_traces;
  rep->add_option("--out", rep_out)->required();
  rep->add_option("traces", rep_traces, "input SimTrace CSV files")->required()->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << app.help() << '\n';
    return 2;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec;
      spec.n_modes = sy_modes;
      spec.steps = sy_steps;
      spec.segment_len = sy_segment;
      spec.ar_order = sy_ar;
      spec.dim = sy_dim;
      spec.noise_std = sy_noise;
      spec.seed = sy_seed;
      auto [series, truth] = generate_synthetic_trip(spec);
      write_trip_csv(series, sy_out);
      const std::string labels_path = sy_labels_out.empty() ? stem_with_suffix(sy_out, "_labels") : sy_labels_out;
      write_labels_csv(series.timestamps, truth, labels_path);
      std::cout << "wrote " << sy_out << " and " << labels_path << '\n';
    } else if (fitc->parsed()) {
      const TimeSeries series = load_trip(fit_in);
      const FitResult result = fit(series, fit_hp.to_hypers(), fit_sweeps, fit_burn, fit_seed);
      write_snapshot(result.model, fit_out, fit_seed, fit_sweeps, fnv1a_hash_file(fit_in));
      const std::string labels_path =
          fit_labels_out.empty() ? stem_with_suffix(fit_out, "_modes") : fit_labels_out;
      write_labels_csv(series.timestamps, result.modes, labels_path);
      if (!fit_diag_out.empty()) write_diag_csv(result.diagnostics, fit_diag_out);
      std::cout << "wrote " << fit_out << " and " << labels_path << '\n';
    } else if (fc->parsed()) {
      const SwitchingArModel model = read_snapshot(fc_snapshot);
      const TimeSeries series = load_trip(fc_in);
      const int r = model.hypers.ar_order;
      if (series.length() < r) throw std::runtime_error("trip shorter than the model AR order");
      Window window;
      for (int t = 0; t < r; ++t) window.push_back(series.values.row(t).transpose());
      ForecastState state = ForecastState::from_model(model, window);
      for (int t = r; t < series.length(); ++t)
        state = update_belief(model, state, series.values.row(t).transpose());
      const auto preds = forecast_k_step(model, state, fc_horizon);

      std::ofstream f(fc_out);
      if (!f) throw std::runtime_error("cannot open " + fc_out + " for writing");
      f << "time_s";
      for (const auto& c : series.channels) f << ',' << c;
      f << '\n';
      const double dt = series.step();
      const double t_end = series.timestamps.back();
      for (int k = 0; k < fc_horizon; ++k) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", t_end + (k + 1) * dt);
        f << buf;
        for (int c = 0; c < series.dim(); ++c) {
          std::snprintf(buf, sizeof(buf), "%.17g", preds[k](c));
          f << ',' << buf;
        }
        f << '\n';
      }
      std::cout << "wrote " << fc_out << '\n';
    } else if (sim->parsed()) {
      const TimeSeries series = load_trip(sim_in);
      ScenarioConfig cfg;
      cfg.hypers = sim_hp.to_hypers();
      cfg.channel.per = sim_per;
      cfg.channel.seed = sim_seed;
      cfg.fit_seed = sim_fit_seed;
      cfg.refit_window = sim_refit;
      cfg.tx_hz = sim_tx_hz;
      cfg.sweeps = sim_sweeps;
      cfg.burn_in = sim_burn;
      if (sim_horizon == "auto") {
        cfg.horizon_policy = HorizonPolicy::UntilNextDelivery;
      } else {
        cfg.horizon_policy = HorizonPolicy::FixedK;
        cfg.fixed_horizon = std::stoi(sim_horizon);
        if (cfg.fixed_horizon < 1) throw std::runtime_error("--horizon must be `auto` or a positive integer");
      }
      const SimTrace trace = run_scenario(series, cfg);
      write_trace_csv(trace, sim_out);
      std::cout << "wrote " << sim_out << '\n';
    } else if (rep->parsed()) {
      std::vector<double> mbc_errors, baseline_errors;
      for (const auto& path : rep_traces) {
        const SimTrace trace = read_trace_csv(path);
        mbc_errors.insert(mbc_errors.end(), trace.mbc_error.begin(), trace.mbc_error.end());
        baseline_errors.insert(baseline_errors.end(), trace.baseline_error.begin(), trace.baseline_error.end());
      }
      write_ecdf_csv(error_ecdf(std::move(mbc_errors)), error_ecdf(std::move(baseline_errors)), rep_out);
      std::cout << "wrote " << rep_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sldsmbc
