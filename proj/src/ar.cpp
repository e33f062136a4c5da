#include "sldsmbc/ar.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sldsmbc {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void check_symmetric(const Eigen::MatrixXd& m, const char* context) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(context) + ": matrix is not symmetric");
}
}  // namespace

MeasurementModel MeasurementModel::identity(int d) {
  MeasurementModel m;
  m.matrix = Eigen::MatrixXd::Identity(d, d);
  m.noise_cov = Eigen::MatrixXd::Zero(d, d);
  return m;
}

MniwPrior MniwPrior::default_prior(int d, int r) {
  if (d < 1 || r < 1) throw std::invalid_argument("default_prior: d and r must be >= 1");
  MniwPrior p;
  p.mean_matrix = Eigen::MatrixXd::Zero(d, d * r);
  p.mean_matrix.leftCols(d) = Eigen::MatrixXd::Identity(d, d);  // persistence on the first lag
  p.col_precision = 0.01 * Eigen::MatrixXd::Identity(d * r, d * r);
  p.iw_scale = 0.1 * Eigen::MatrixXd::Identity(d, d);
  p.iw_dof = d + 2;
  return p;
}

double TimeSeries::step() const {
  if (timestamps.size() < 2) return 0.1;
  return timestamps[1] - timestamps[0];
}

void TimeSeries::validate() const {
  if (static_cast<int>(timestamps.size()) != length())
    throw std::invalid_argument("TimeSeries: timestamp count does not match rows");
  if (static_cast<int>(channels.size()) != dim())
    throw std::invalid_argument("TimeSeries: channel count does not match columns");
  if (!values.allFinite()) throw std::invalid_argument("TimeSeries: non-finite value present");
  if (timestamps.size() >= 2) {
    const double dt = timestamps[1] - timestamps[0];
    if (dt <= 0.0) throw std::invalid_argument("TimeSeries: timestamps not strictly increasing");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      const double d = timestamps[i] - timestamps[i - 1];
      if (std::abs(d - dt) > 1e-6)
        throw std::invalid_argument("TimeSeries: non-uniform sampling at row " + std::to_string(i));
    }
  }
}

Eigen::VectorXd stack_window(const Window& window) {
  if (window.empty()) throw std::invalid_argument("stack_window: empty window");
  const int d = static_cast<int>(window[0].size());
  const int r = static_cast<int>(window.size());
  Eigen::VectorXd x(d * r);
  for (int l = 0; l < r; ++l) x.segment(l * d, d) = window[r - 1 - l];  // lag-1 block first
  return x;
}

Eigen::VectorXd ar_predict(const ArModeParams& params, const Window& window) {
  const int r = params.order();
  if (static_cast<int>(window.size()) != r)
    throw std::invalid_argument("ar_predict: window length does not match AR order");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(params.dim());
  for (int l = 0; l < r; ++l) mean += params.lag_matrices[l] * window[r - 1 - l];
  return mean;
}

Eigen::MatrixXd chol_lower_spd(const Eigen::MatrixXd& m, const char* context) {
  check_symmetric(m, context);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd candidate = m;
    if (jitter > 0.0) candidate += jitter * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(candidate);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-9 : jitter * 10.0;
  }
  throw std::runtime_error(std::string(context) + ": matrix is not positive-definite");
}

double ar_log_likelihood(const ArModeParams& params, const Window& window, const Eigen::VectorXd& y) {
  const int d = params.dim();
  if (y.size() != d) throw std::invalid_argument("ar_log_likelihood: observation dimension mismatch");
  const Eigen::VectorXd resid = y - ar_predict(params, window);
  const Eigen::MatrixXd L = chol_lower_spd(params.noise_cov, "ar_log_likelihood");
  const Eigen::VectorXd a = L.triangularView<Eigen::Lower>().solve(resid);
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * (d * kLogTwoPi + log_det + a.squaredNorm());
}

MniwPrior mniw_posterior(const MniwPrior& prior, const ArRegressionData& data) {
  const int d = prior.dim();
  const int q = d * prior.order();
  if (data.count() == 0) return prior;
  if (data.X.cols() != q || data.Y.cols() != d || data.X.rows() != data.Y.rows())
    throw std::invalid_argument("mniw_posterior: data dimensions do not match prior");

  const Eigen::MatrixXd sxx = data.X.transpose() * data.X;
  const Eigen::MatrixXd syx = data.Y.transpose() * data.X;
  const Eigen::MatrixXd syy = data.Y.transpose() * data.Y;

  MniwPrior post;
  post.col_precision = prior.col_precision + sxx;
  const Eigen::MatrixXd rhs = prior.mean_matrix * prior.col_precision + syx;
  post.mean_matrix = post.col_precision.ldlt().solve(rhs.transpose()).transpose();
  post.iw_scale = prior.iw_scale + syy + prior.mean_matrix * prior.col_precision * prior.mean_matrix.transpose() -
                  post.mean_matrix * post.col_precision * post.mean_matrix.transpose();
  post.iw_scale = 0.5 * (post.iw_scale + post.iw_scale.transpose());
  post.iw_dof = prior.iw_dof + data.count();
  return post;
}

ArModeParams sample_mode_params(const MniwPrior& posterior, Rng& rng) {
  const int d = posterior.dim();
  const int r = posterior.order();
  const int q = d * r;
  if (posterior.iw_dof <= d - 1) throw std::invalid_argument("sample_mode_params: iw_dof must exceed d-1");

  // Sigma ~ IW(iw_scale, iw_dof) by Bartlett on the inverse scale
  const Eigen::MatrixXd Ls = chol_lower_spd(posterior.iw_scale, "sample_mode_params/iw_scale");
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_squared(posterior.iw_dof - i));
    for (int j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  // T = Ls^{-T} satisfies T T^T = iw_scale^{-1}
  const Eigen::MatrixXd T =
      Ls.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd wishart = T * bartlett * bartlett.transpose() * T.transpose();
  Eigen::MatrixXd sigma = wishart.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
  sigma = 0.5 * (sigma + sigma.transpose());

  // A | Sigma ~ MN(mean, Sigma, col_precision^{-1})
  const Eigen::MatrixXd Lk = chol_lower_spd(posterior.col_precision, "sample_mode_params/col_precision");
  Eigen::MatrixXd z(d, q);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
  const Eigen::MatrixXd Lsig = chol_lower_spd(sigma, "sample_mode_params/sigma");
  // right factor: solve Lk^T * Vt = z^T so that V = z * Lk^{-T}, V V^T-free form with col cov K^{-1}
  const Eigen::MatrixXd v = Lk.transpose().triangularView<Eigen::Upper>().solve(z.transpose()).transpose();
  const Eigen::MatrixXd a = posterior.mean_matrix + Lsig * v;

  ArModeParams params;
  params.noise_cov = sigma;
  params.lag_matrices.reserve(r);
  for (int l = 0; l < r; ++l) params.lag_matrices.push_back(a.middleCols(l * d, d));
  return params;
}

TimeSeries simulate_switching_ar(const std::vector<int>& modes,
                                 const std::vector<ArModeParams>& params,
                                 const Window& init_window, double t0, double dt,
                                 std::vector<std::string> channels, Rng& rng,
                                 const MeasurementModel* measurement) {
  if (params.empty()) throw std::invalid_argument("simulate_switching_ar: no mode parameters");
  const int d = params[0].dim();
  const int r = params[0].order();
  if (static_cast<int>(init_window.size()) != r)
    throw std::invalid_argument("simulate_switching_ar: init window length must equal AR order");

  const int T = static_cast<int>(modes.size());
  TimeSeries out;
  out.channels = std::move(channels);
  out.values.resize(T, d);
  out.timestamps.resize(T);

  Window window = init_window;
  for (int t = 0; t < T; ++t) {
    const int m = modes[t];
    if (m < 0 || m >= static_cast<int>(params.size()))
      throw std::invalid_argument("simulate_switching_ar: unknown mode label " + std::to_string(m));
    Eigen::VectorXd x = ar_predict(params[m], window);
    if (!params[m].noise_cov.isZero(0.0)) {
      const Eigen::MatrixXd L = chol_lower_spd(params[m].noise_cov, "simulate_switching_ar");
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z(i) = rng.normal();
      x += L * z;
    }
    Eigen::VectorXd y = x;
    if (measurement != nullptr) {
      y = measurement->matrix * x;
      if (!measurement->noise_cov.isZero(0.0)) {
        const Eigen::MatrixXd L = chol_lower_spd(measurement->noise_cov, "simulate_switching_ar/measurement");
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z(i) = rng.normal();
        y += L * z;
      }
    }
    out.values.row(t) = y.transpose();
    out.timestamps[t] = t0 + t * dt;
    window.erase(window.begin());
    window.push_back(x);
  }
  return out;
}

}  // namespace sldsmbc
