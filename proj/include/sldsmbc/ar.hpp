#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "sldsmbc/random.hpp"

namespace sldsmbc {

// Last r observation vectors, oldest first. window.back() is the most
// recent observation.
using Window = std::vector<Eigen::VectorXd>;

// Linear dynamics of one behavioral mode: lag_matrices[l] multiplies the
// observation l+1 steps back.
struct ArModeParams {
  std::vector<Eigen::MatrixXd> lag_matrices;
  Eigen::MatrixXd noise_cov;

  int dim() const { return noise_cov.rows() > 0 ? static_cast<int>(noise_cov.rows()) : (lag_matrices.empty() ? 0 : static_cast<int>(lag_matrices[0].rows())); }
  int order() const { return static_cast<int>(lag_matrices.size()); }
};

// y = C x + w. Inference fixes C = I, w = 0; simulation may add noise.
struct MeasurementModel {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd noise_cov;

  static MeasurementModel identity(int d);
};

// Matrix-normal inverse-Wishart over (stacked lag matrix, noise covariance).
struct MniwPrior {
  Eigen::MatrixXd mean_matrix;    // d x (d*r)
  Eigen::MatrixXd col_precision;  // (d*r) x (d*r), SPD
  Eigen::MatrixXd iw_scale;       // d x d, SPD
  double iw_dof = 0.0;            // > d - 1

  int dim() const { return static_cast<int>(mean_matrix.rows()); }
  int order() const { return dim() == 0 ? 0 : static_cast<int>(mean_matrix.cols()) / dim(); }

  // Weakly informative default: first-lag identity mean (persistence),
  // loose column precision, small IW scale.
  static MniwPrior default_prior(int d, int r);
};

struct TimeSeries {
  std::vector<double> timestamps;      // strictly increasing, uniform step
  std::vector<std::string> channels;   // one name per column
  Eigen::MatrixXd values;              // T x d

  int length() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
  double step() const;
  void validate() const;  // throws on NaN or non-uniform sampling
};

// Stacks a window into the regression covariate: most recent lag block first.
Eigen::VectorXd stack_window(const Window& window);

// Mean one-step prediction sum_l A_l * window[r-1-l].
Eigen::VectorXd ar_predict(const ArModeParams& params, const Window& window);

double ar_log_likelihood(const ArModeParams& params, const Window& window, const Eigen::VectorXd& y);

// (window, target) regression pairs in stacked form: X is n x (d*r), Y is n x d.
struct ArRegressionData {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;

  int count() const { return static_cast<int>(X.rows()); }
};

MniwPrior mniw_posterior(const MniwPrior& prior, const ArRegressionData& data);

ArModeParams sample_mode_params(const MniwPrior& posterior, Rng& rng);

// Cholesky with escalating jitter (1e-9, three escalations) before failing.
Eigen::MatrixXd chol_lower_spd(const Eigen::MatrixXd& m, const char* context);

// Ground-truth generator for Eq-of-motion recovery tests. `measurement`
// null means identity observation with no noise.
TimeSeries simulate_switching_ar(const std::vector<int>& modes,
                                 const std::vector<ArModeParams>& params,
                                 const Window& init_window, double t0, double dt,
                                 std::vector<std::string> channels, Rng& rng,
                                 const MeasurementModel* measurement = nullptr);

}  // namespace sldsmbc
