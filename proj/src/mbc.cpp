#include "sldsmbc/mbc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sldsmbc {

std::vector<std::uint8_t> simulate_channel(int n_packets, const ChannelConfig& config) {
  if (n_packets < 0) throw std::invalid_argument("simulate_channel: n_packets must be nonnegative");
  if (config.per < 0.0 || config.per > 1.0) throw std::invalid_argument("simulate_channel: per outside [0,1]");
  Rng rng(splitmix64(config.seed ^ 0xc8a5d5b1ee7d3f21ULL));
  std::vector<std::uint8_t> mask(n_packets);
  for (int i = 0; i < n_packets; ++i) mask[i] = rng.bernoulli(1.0 - config.per) ? 1 : 0;
  return mask;
}

namespace {

TimeSeries slice(const TimeSeries& s, int begin, int end) {
  TimeSeries out;
  out.channels = s.channels;
  out.timestamps.assign(s.timestamps.begin() + begin, s.timestamps.begin() + end);
  out.values = s.values.middleRows(begin, end - begin);
  return out;
}

Window window_ending_before(const TimeSeries& s, int t, int r) {
  Window w;
  for (int i = t - r; i < t; ++i) w.push_back(s.values.row(i).transpose());
  return w;
}

// what a broadcast packet carries: the model snapshot, the transmitter's
// forecasting state (window ending one step before the send instant), and
// the raw observation for the zero-hold baseline
struct Packet {
  SwitchingArModel model;
  ForecastState state;
  Eigen::VectorXd raw;
};

}  // namespace

SimTrace run_scenario(const TimeSeries& series, const ScenarioConfig& config) {
  series.validate();
  const int T = series.length();
  const int W = config.refit_window;
  const int r = config.hypers.ar_order;
  if (config.tx_hz <= 0.0) throw std::invalid_argument("run_scenario: tx_hz must be positive");
  if (W <= r + 2) throw std::invalid_argument("run_scenario: refit_window must exceed ar_order + 2");
  if (T < W + 1) throw std::invalid_argument("run_scenario: series shorter than one refit_window");

  const double dt = series.step();
  const int steps_per_tx = std::max(1, static_cast<int>(std::llround(1.0 / (config.tx_hz * dt))));
  const int n_packets = (T - W + steps_per_tx - 1) / steps_per_tx;
  const std::vector<std::uint8_t> mask = simulate_channel(n_packets, config.channel);

  // initial snapshot from the warmup window
  int fit_counter = 0;
  FitResult fitted = fit(slice(series, 0, W), config.hypers, config.sweeps, config.burn_in,
                         config.fit_seed ^ splitmix64(static_cast<std::uint64_t>(fit_counter++)));
  int last_fit_end = W;

  ForecastState tx_state = ForecastState::from_model(fitted.model, window_ending_before(series, W, r));

  Packet received;
  received.model = fitted.model;
  received.state = tx_state;
  received.raw = series.values.row(W - 1).transpose();

  // receiver rolling forecast, re-seeded on every adoption
  Window rcv_window = received.state.window;
  Eigen::VectorXd rcv_belief = received.state.mode_belief;
  Eigen::VectorXd held_pred;
  int steps_since_adopt = 0;

  SimTrace trace;
  trace.time.reserve(T - W);
  int packet_idx = 0;

  for (int t = W; t < T; ++t) {
    const Eigen::VectorXd y = series.values.row(t).transpose();
    bool delivered_now = false;

    if ((t - W) % steps_per_tx == 0) {
      // refit when the snapshot has gone stale
      if (t - last_fit_end >= W / 2) {
        fitted = fit(slice(series, t - W, t), config.hypers, config.sweeps, config.burn_in,
                     config.fit_seed ^ splitmix64(static_cast<std::uint64_t>(fit_counter++)));
        last_fit_end = t;
        tx_state = ForecastState::from_model(fitted.model, tx_state.window);
      }
      Packet pkt;
      pkt.model = fitted.model;
      pkt.state = tx_state;  // window ends at y_{t-1}
      pkt.raw = y;
      if (mask[packet_idx++]) {
        received = std::move(pkt);
        rcv_window = received.state.window;
        rcv_belief = received.state.mode_belief;
        steps_since_adopt = 0;
        delivered_now = true;
      }
    }

    // receiver prediction of y_t from the last adopted state
    Eigen::VectorXd pred;
    const bool hold = config.horizon_policy == HorizonPolicy::FixedK && steps_since_adopt >= config.fixed_horizon;
    if (hold) {
      pred = held_pred;
    } else {
      rcv_belief = received.model.transition.transpose() * rcv_belief;
      rcv_belief /= rcv_belief.sum();
      pred = Eigen::VectorXd::Zero(series.dim());
      for (int k = 0; k < received.model.num_modes(); ++k)
        if (rcv_belief(k) > 0.0) pred += rcv_belief(k) * ar_predict(received.model.modes[k], rcv_window);
      rcv_window.erase(rcv_window.begin());
      rcv_window.push_back(pred);
      held_pred = pred;
      ++steps_since_adopt;
    }

    trace.time.push_back(series.timestamps[t]);
    trace.delivered.push_back(delivered_now ? 1 : 0);
    trace.mbc_error.push_back((y - pred).norm());
    trace.baseline_error.push_back((y - received.raw).norm());

    // transmitter keeps filtering with the true observation
    tx_state = update_belief(fitted.model, tx_state, y);
    int map_mode = 0;
    tx_state.mode_belief.maxCoeff(&map_mode);
    trace.mode_labels.push_back(map_mode);
  }
  return trace;
}

Ecdf error_ecdf(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("error_ecdf: empty input");
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  Ecdf out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i + 1 < errors.size() && errors[i + 1] == errors[i]) continue;  // keep the last of a tie run
    out.thresholds.push_back(errors[i]);
    out.fractions.push_back(static_cast<double>(i + 1) / n);
  }
  out.fractions.back() = 1.0;
  return out;
}

double ecdf_at(const Ecdf& ecdf, double t) {
  const auto it = std::upper_bound(ecdf.thresholds.begin(), ecdf.thresholds.end(), t);
  if (it == ecdf.thresholds.begin()) return 0.0;
  return ecdf.fractions[static_cast<std::size_t>(it - ecdf.thresholds.begin()) - 1];
}

}  // namespace sldsmbc
