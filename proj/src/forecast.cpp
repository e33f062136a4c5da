#include "sldsmbc/forecast.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sldsmbc {

namespace {

void check_state(const SwitchingArModel& model, const ForecastState& state) {
  if (static_cast<int>(state.mode_belief.size()) != model.num_modes())
    throw std::invalid_argument("forecast: belief length does not match mode count");
  if (static_cast<int>(state.window.size()) != model.hypers.ar_order)
    throw std::invalid_argument("forecast: window length does not match AR order");
}

}  // namespace

ForecastState ForecastState::from_model(const SwitchingArModel& model, const Window& window) {
  ForecastState s;
  s.window = window;
  s.mode_belief = model.global_weights;
  return s;
}

std::vector<Eigen::VectorXd> forecast_k_step(const SwitchingArModel& model, const ForecastState& state,
                                             int horizon, bool map_mode) {
  if (horizon < 1) throw std::invalid_argument("forecast_k_step: horizon must be >= 1");
  check_state(model, state);

  std::vector<Eigen::VectorXd> out;
  out.reserve(horizon);
  Window window = state.window;
  Eigen::VectorXd belief = state.mode_belief;
  int hard_mode = 0;
  if (map_mode) belief.maxCoeff(&hard_mode);

  for (int step = 0; step < horizon; ++step) {
    Eigen::VectorXd pred;
    if (map_mode) {
      int next_mode = 0;
      model.transition.row(hard_mode).maxCoeff(&next_mode);
      hard_mode = next_mode;
      pred = ar_predict(model.modes[hard_mode], window);
    } else {
      belief = model.transition.transpose() * belief;
      belief /= belief.sum();
      pred = Eigen::VectorXd::Zero(state.window[0].size());
      for (int k = 0; k < model.num_modes(); ++k)
        if (belief(k) > 0.0) pred += belief(k) * ar_predict(model.modes[k], window);
    }
    out.push_back(pred);
    window.erase(window.begin());
    window.push_back(pred);
  }
  return out;
}

ForecastState update_belief(const SwitchingArModel& model, const ForecastState& state,
                            const Eigen::VectorXd& observed) {
  check_state(model, state);
  if (!observed.allFinite()) throw std::invalid_argument("update_belief: non-finite observation");

  const int L = model.num_modes();
  Eigen::VectorXd prior = model.transition.transpose() * state.mode_belief;
  prior /= prior.sum();

  Eigen::VectorXd log_w(L);
  for (int k = 0; k < L; ++k)
    log_w(k) = (prior(k) > 0.0 ? std::log(prior(k)) + ar_log_likelihood(model.modes[k], state.window, observed)
                               : -std::numeric_limits<double>::infinity());
  const double m = log_w.maxCoeff();

  ForecastState next;
  next.window = state.window;
  next.window.erase(next.window.begin());
  next.window.push_back(observed);
  next.underflow_flag = state.underflow_flag;

  if (!std::isfinite(m)) {
    // every mode underflowed: keep the propagated prior and flag it
    next.mode_belief = prior;
    next.underflow_flag = true;
    return next;
  }
  Eigen::VectorXd w = (log_w.array() - m).exp().matrix();
  next.mode_belief = w / w.sum();
  return next;
}

std::vector<Eigen::VectorXd> zero_hold_forecast(const Eigen::VectorXd& last_received, int horizon) {
  if (horizon < 1) throw std::invalid_argument("zero_hold_forecast: horizon must be >= 1");
  return std::vector<Eigen::VectorXd>(horizon, last_received);
}

}  // namespace sldsmbc
