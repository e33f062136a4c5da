#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sldsmbc/hdp_hmm.hpp"

namespace sldsmbc {

// Receiver-side forecasting state: lag window plus belief over modes.
struct ForecastState {
  Window window;
  Eigen::VectorXd mode_belief;
  bool underflow_flag = false;  // set when a belief update had to fall back to the prior

  static ForecastState from_model(const SwitchingArModel& model, const Window& window);
};

// k mean forecasts under belief propagation through the transition matrix.
// map_mode selects a hard-argmax mode rollout instead of the mixture mean.
std::vector<Eigen::VectorXd> forecast_k_step(const SwitchingArModel& model, const ForecastState& state,
                                             int horizon, bool map_mode = false);

// One Bayes filter step: propagate belief through the transition matrix,
// reweight by per-mode likelihoods of the observation, shift the window.
ForecastState update_belief(const SwitchingArModel& model, const ForecastState& state,
                            const Eigen::VectorXd& observed);

std::vector<Eigen::VectorXd> zero_hold_forecast(const Eigen::VectorXd& last_received, int horizon);

}  // namespace sldsmbc
