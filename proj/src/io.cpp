#include "sldsmbc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sldsmbc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, int row, const std::string& column) {
  if (cell.empty())
    throw std::runtime_error("blank " + column + " cell at row " + std::to_string(row));
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("unparseable " + column + " cell at row " + std::to_string(row));
  }
  if (pos != cell.size() || !std::isfinite(v))
    throw std::runtime_error("non-finite " + column + " cell at row " + std::to_string(row));
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw std::runtime_error("ragged matrix in snapshot");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

}  // namespace

TimeSeries load_trip(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trip file " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty trip file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "time_s")
    throw std::runtime_error("trip file " + path + " missing required column time_s");
  if (header.size() < 2) throw std::runtime_error("trip file " + path + " has no signal columns");

  TimeSeries out;
  out.channels.assign(header.begin() + 1, header.end());
  std::vector<double> times;
  std::vector<double> flat;
  int row = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("wrong cell count at row " + std::to_string(row));
    times.push_back(parse_cell(cells[0], row, "time_s"));
    for (std::size_t c = 1; c < cells.size(); ++c) flat.push_back(parse_cell(cells[c], row, header[c]));
  }
  const int T = static_cast<int>(times.size());
  const int d = static_cast<int>(out.channels.size());
  out.timestamps = std::move(times);
  out.values.resize(T, d);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < d; ++c) out.values(t, c) = flat[t * d + c];
  out.validate();
  return out;
}

void write_trip_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "time_s";
  for (const auto& c : series.channels) f << ',' << c;
  f << '\n';
  for (int t = 0; t < series.length(); ++t) {
    f << fmt(series.timestamps[t]);
    for (int c = 0; c < series.dim(); ++c) f << ',' << fmt(series.values(t, c));
    f << '\n';
  }
}

void write_labels_csv(const std::vector<double>& timestamps, const ModeSequence& modes,
                      const std::string& path) {
  if (static_cast<int>(timestamps.size()) != modes.length())
    throw std::invalid_argument("write_labels_csv: length mismatch");
  std::ofstream f = open_out(path);
  f << "time_s,mode\n";
  for (int t = 0; t < modes.length(); ++t) f << fmt(timestamps[t]) << ',' << modes.labels[t] << '\n';
}

std::pair<TimeSeries, ModeSequence> generate_synthetic_trip(const SynthSpec& spec) {
  if (spec.n_modes < 1 || spec.steps < 1 || spec.segment_len < 1 || spec.ar_order < 1 || spec.dim < 1)
    throw std::invalid_argument("generate_synthetic_trip: all sizes must be positive");

  Rng param_rng(splitmix64(spec.seed ^ 0xa1b2c3d4e5f60718ULL));
  std::vector<ArModeParams> params(spec.n_modes);
  for (int m = 0; m < spec.n_modes; ++m) {
    ArModeParams& p = params[m];
    p.noise_cov = spec.noise_std * spec.noise_std * Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    p.lag_matrices.assign(spec.ar_order, Eigen::MatrixXd::Zero(spec.dim, spec.dim));
    for (int c = 0; c < spec.dim; ++c) {
      if (spec.ar_order == 1) {
        // coefficients spread across (-0.6, 0.95) so modes stay identifiable;
        // the seed only jitters them
        const double frac = spec.n_modes == 1 ? 0.0 : double(m) / (spec.n_modes - 1);
        p.lag_matrices[0](c, c) = 0.9 - 1.45 * frac + 0.06 * (param_rng.uniform() - 0.5);
      } else {
        // damped oscillator per channel: distinct frequency/damping per mode
        const double rho = 0.985 + 0.012 * param_rng.uniform();
        const double omega = 0.2 + 0.4 * param_rng.uniform();
        p.lag_matrices[0](c, c) = 2.0 * rho * std::cos(omega);
        p.lag_matrices[1](c, c) = -rho * rho;
      }
    }
  }

  ModeSequence truth;
  truth.labels.resize(spec.steps);
  for (int t = 0; t < spec.steps; ++t) truth.labels[t] = (t / spec.segment_len) % spec.n_modes;

  Window init(spec.ar_order, Eigen::VectorXd::Zero(spec.dim));
  Rng sim_rng(splitmix64(spec.seed ^ 0x1f2e3d4c5b6a7988ULL));
  for (auto& w : init)
    for (int c = 0; c < spec.dim; ++c) w(c) = 0.5 * sim_rng.normal();

  TimeSeries series;
  std::vector<std::string> channels;
  for (int c = 0; c < spec.dim; ++c) channels.push_back("signal_" + std::to_string(c));
  series = simulate_switching_ar(truth.labels, params, init, 0.0, spec.dt, std::move(channels), sim_rng);
  return {std::move(series), std::move(truth)};
}

void write_snapshot(const SwitchingArModel& model, const std::string& path, std::uint64_t seed,
                    int sweeps, const std::string& data_hash) {
  json j;
  j["format_version"] = "1";
  j["hypers"] = {
      {"lambda", model.hypers.lambda},
      {"psi", model.hypers.psi},
      {"kappa", model.hypers.kappa},
      {"truncation", model.hypers.truncation},
      {"ar_order", model.hypers.ar_order},
      {"emission_prior",
       {{"mean_matrix", matrix_to_json(model.hypers.emission_prior.mean_matrix)},
        {"col_precision", matrix_to_json(model.hypers.emission_prior.col_precision)},
        {"iw_scale", matrix_to_json(model.hypers.emission_prior.iw_scale)},
        {"iw_dof", model.hypers.emission_prior.iw_dof}}},
  };
  json weights = json::array();
  for (int k = 0; k < model.global_weights.size(); ++k) weights.push_back(model.global_weights(k));
  j["global_weights"] = weights;
  j["transition"] = matrix_to_json(model.transition);
  json modes = json::array();
  for (const auto& m : model.modes) {
    json lags = json::array();
    for (const auto& a : m.lag_matrices) lags.push_back(matrix_to_json(a));
    modes.push_back({{"lag_matrices", lags}, {"noise_cov", matrix_to_json(m.noise_cov)}});
  }
  j["modes"] = modes;
  j["fit_meta"] = {{"seed", seed}, {"sweeps", sweeps}, {"data_hash", data_hash}};

  std::ofstream f = open_out(path);
  f << j.dump(2) << '\n';
}

SwitchingArModel read_snapshot(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open snapshot " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed snapshot " + path + ": " + e.what());
  }
  try {
    const std::string version = j.at("format_version").get<std::string>();
    if (version != "1")
      throw std::runtime_error("snapshot " + path + " has unsupported format_version " + version);

    SwitchingArModel model;
    const json& hp = j.at("hypers");
    model.hypers.lambda = hp.at("lambda").get<double>();
    model.hypers.psi = hp.at("psi").get<double>();
    model.hypers.kappa = hp.at("kappa").get<double>();
    model.hypers.truncation = hp.at("truncation").get<int>();
    model.hypers.ar_order = hp.at("ar_order").get<int>();
    const json& prior = hp.at("emission_prior");
    model.hypers.emission_prior.mean_matrix = matrix_from_json(prior.at("mean_matrix"));
    model.hypers.emission_prior.col_precision = matrix_from_json(prior.at("col_precision"));
    model.hypers.emission_prior.iw_scale = matrix_from_json(prior.at("iw_scale"));
    model.hypers.emission_prior.iw_dof = prior.at("iw_dof").get<double>();

    const json& weights = j.at("global_weights");
    model.global_weights.resize(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) model.global_weights(k) = weights[k].get<double>();
    model.transition = matrix_from_json(j.at("transition"));
    for (const json& m : j.at("modes")) {
      ArModeParams p;
      for (const json& a : m.at("lag_matrices")) p.lag_matrices.push_back(matrix_from_json(a));
      p.noise_cov = matrix_from_json(m.at("noise_cov"));
      model.modes.push_back(std::move(p));
    }

    const int L = model.hypers.truncation;
    if (model.num_modes() != L || model.transition.rows() != L || model.transition.cols() != L ||
        static_cast<int>(model.global_weights.size()) != L)
      throw std::runtime_error("snapshot " + path + " has inconsistent dimensions");
    for (const auto& m : model.modes)
      if (m.order() != model.hypers.ar_order)
        throw std::runtime_error("snapshot " + path + " mode lag count does not match ar_order");
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed snapshot " + path + ": " + e.what());
  }
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "time_s,delivered,mbc_error,baseline_error,mode\n";
  for (int t = 0; t < trace.length(); ++t)
    f << fmt(trace.time[t]) << ',' << int(trace.delivered[t]) << ',' << fmt(trace.mbc_error[t]) << ','
      << fmt(trace.baseline_error[t]) << ',' << trace.mode_labels[t] << '\n';
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty trace file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time_s,delivered,mbc_error,baseline_error,mode")
    throw std::runtime_error("trace file " + path + " has an unexpected header");
  SimTrace trace;
  int row = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw std::runtime_error("wrong cell count at row " + std::to_string(row));
    trace.time.push_back(parse_cell(cells[0], row, "time_s"));
    trace.delivered.push_back(parse_cell(cells[1], row, "delivered") != 0.0 ? 1 : 0);
    trace.mbc_error.push_back(parse_cell(cells[2], row, "mbc_error"));
    trace.baseline_error.push_back(parse_cell(cells[3], row, "baseline_error"));
    trace.mode_labels.push_back(static_cast<int>(parse_cell(cells[4], row, "mode")));
  }
  return trace;
}

void write_ecdf_csv(const Ecdf& mbc, const Ecdf& baseline, const std::string& path) {
  std::vector<double> thresholds;
  thresholds.reserve(mbc.thresholds.size() + baseline.thresholds.size());
  thresholds.insert(thresholds.end(), mbc.thresholds.begin(), mbc.thresholds.end());
  thresholds.insert(thresholds.end(), baseline.thresholds.begin(), baseline.thresholds.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::ofstream f = open_out(path);
  f << "threshold,ecdf_mbc,ecdf_baseline\n";
  for (double t : thresholds)
    f << fmt(t) << ',' << fmt(ecdf_at(mbc, t)) << ',' << fmt(ecdf_at(baseline, t)) << '\n';
}

}  // namespace sldsmbc
