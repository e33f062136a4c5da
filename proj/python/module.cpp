#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sldsmbc/dp.hpp"
#include "sldsmbc/forecast.hpp"
#include "sldsmbc/io.hpp"
#include "sldsmbc/mbc.hpp"

namespace py = pybind11;
using namespace sldsmbc;

namespace {

Window window_from_matrix(const Eigen::MatrixXd& m) {
  Window w;
  for (int i = 0; i < m.rows(); ++i) w.push_back(m.row(i).transpose());
  return w;
}

Eigen::MatrixXd matrix_from_vectors(const std::vector<Eigen::VectorXd>& v) {
  Eigen::MatrixXd m(static_cast<int>(v.size()), v.empty() ? 0 : static_cast<int>(v[0].size()));
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<int>(i)) = v[i].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_sldsmbc, m) {
  m.doc() = "Switching-AR HDP-HMM driver behavior model with a model-based-communication simulator";

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init([](std::vector<double> timestamps, std::vector<std::string> channels,
                       Eigen::MatrixXd values) {
             TimeSeries s;
             s.timestamps = std::move(timestamps);
             s.channels = std::move(channels);
             s.values = std::move(values);
             s.validate();
             return s;
           }),
           py::arg("timestamps"), py::arg("channels"), py::arg("values"))
      .def_readonly("timestamps", &TimeSeries::timestamps)
      .def_readonly("channels", &TimeSeries::channels)
      .def_readonly("values", &TimeSeries::values)
      .def("__len__", &TimeSeries::length);

  py::class_<StickWeights>(m, "StickWeights")
      .def_readonly("fractions", &StickWeights::fractions)
      .def_readonly("weights", &StickWeights::weights)
      .def_readonly("truncation", &StickWeights::truncation);

  m.def("stick_weights_from_fractions", &stick_weights_from_fractions, py::arg("fractions"),
        py::arg("truncation"));
  m.def(
      "sample_stick_weights",
      [](double concentration, int truncation, std::uint64_t seed) {
        Rng rng(seed);
        return sample_stick_weights(concentration, truncation, rng);
      },
      py::arg("concentration"), py::arg("truncation"), py::arg("seed"));
  m.def("crp_log_partition_prob", &crp_log_partition_prob, py::arg("labels"), py::arg("concentration"));

  py::class_<HdpHyperParams>(m, "HdpHyperParams")
      .def(py::init<>())
      .def_readwrite("lambda_", &HdpHyperParams::lambda)
      .def_readwrite("psi", &HdpHyperParams::psi)
      .def_readwrite("kappa", &HdpHyperParams::kappa)
      .def_readwrite("truncation", &HdpHyperParams::truncation)
      .def_readwrite("ar_order", &HdpHyperParams::ar_order);

  py::class_<SwitchingArModel>(m, "SwitchingArModel")
      .def_readonly("global_weights", &SwitchingArModel::global_weights)
      .def_readonly("transition", &SwitchingArModel::transition)
      .def_property_readonly("num_modes", &SwitchingArModel::num_modes)
      .def_property_readonly("hypers", [](const SwitchingArModel& s) { return s.hypers; });

  py::class_<FitDiagnostics>(m, "FitDiagnostics")
      .def_readonly("occupied_modes", &FitDiagnostics::occupied_modes)
      .def_readonly("joint_log_lik", &FitDiagnostics::joint_log_lik);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_property_readonly("labels", [](const FitResult& r) { return r.modes.labels; })
      .def_readonly("diagnostics", &FitResult::diagnostics);

  m.def(
      "fit",
      [](const TimeSeries& data, const HdpHyperParams& hypers, int sweeps, int burn_in,
         std::uint64_t seed) { return fit(data, hypers, sweeps, burn_in, seed); },
      py::arg("data"), py::arg("hypers"), py::arg("sweeps") = 500, py::arg("burn_in") = 300,
      py::arg("seed") = 0);

  m.def(
      "forecast_k_step",
      [](const SwitchingArModel& model, const Eigen::MatrixXd& window, int horizon, bool map_mode) {
        const ForecastState state = ForecastState::from_model(model, window_from_matrix(window));
        return matrix_from_vectors(forecast_k_step(model, state, horizon, map_mode));
      },
      py::arg("model"), py::arg("window"), py::arg("horizon"), py::arg("map_mode") = false);

  m.def(
      "zero_hold_forecast",
      [](const Eigen::VectorXd& last, int horizon) { return matrix_from_vectors(zero_hold_forecast(last, horizon)); },
      py::arg("last_received"), py::arg("horizon"));

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n_modes", &SynthSpec::n_modes)
      .def_readwrite("steps", &SynthSpec::steps)
      .def_readwrite("segment_len", &SynthSpec::segment_len)
      .def_readwrite("ar_order", &SynthSpec::ar_order)
      .def_readwrite("dim", &SynthSpec::dim)
      .def_readwrite("noise_std", &SynthSpec::noise_std)
      .def_readwrite("seed", &SynthSpec::seed);

  m.def("generate_synthetic_trip", [](const SynthSpec& spec) {
    auto [series, truth] = generate_synthetic_trip(spec);
    return py::make_tuple(series, truth.labels);
  });

  m.def(
      "simulate_channel",
      [](int n, double per, std::uint64_t seed) {
        ChannelConfig cfg;
        cfg.per = per;
        cfg.seed = seed;
        return simulate_channel(n, cfg);
      },
      py::arg("n_packets"), py::arg("per"), py::arg("seed") = 0);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("tx_hz", &ScenarioConfig::tx_hz)
      .def_readwrite("refit_window", &ScenarioConfig::refit_window)
      .def_readwrite("fixed_horizon", &ScenarioConfig::fixed_horizon)
      .def_readwrite("hypers", &ScenarioConfig::hypers)
      .def_readwrite("sweeps", &ScenarioConfig::sweeps)
      .def_readwrite("burn_in", &ScenarioConfig::burn_in)
      .def_readwrite("fit_seed", &ScenarioConfig::fit_seed)
      .def_property(
          "per", [](const ScenarioConfig& c) { return c.channel.per; },
          [](ScenarioConfig& c, double per) { c.channel.per = per; })
      .def_property(
          "channel_seed", [](const ScenarioConfig& c) { return c.channel.seed; },
          [](ScenarioConfig& c, std::uint64_t s) { c.channel.seed = s; });

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("time", &SimTrace::time)
      .def_readonly("delivered", &SimTrace::delivered)
      .def_readonly("mbc_error", &SimTrace::mbc_error)
      .def_readonly("baseline_error", &SimTrace::baseline_error)
      .def_readonly("mode_labels", &SimTrace::mode_labels)
      .def("__len__", &SimTrace::length);

  m.def("run_scenario", &run_scenario, py::arg("series"), py::arg("config"));

  py::class_<Ecdf>(m, "Ecdf")
      .def_readonly("thresholds", &Ecdf::thresholds)
      .def_readonly("fractions", &Ecdf::fractions);
  m.def("error_ecdf", &error_ecdf, py::arg("errors"));
  m.def("ecdf_at", &ecdf_at, py::arg("ecdf"), py::arg("t"));

  m.def("load_trip", &load_trip, py::arg("path"));
  m.def("write_trip_csv", &write_trip_csv, py::arg("series"), py::arg("path"));
  m.def("write_snapshot", &write_snapshot, py::arg("model"), py::arg("path"), py::arg("seed") = 0,
        py::arg("sweeps") = 0, py::arg("data_hash") = "");
  m.def("read_snapshot", &read_snapshot, py::arg("path"));
}
