#include "sldsmbc/hdp_hmm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sldsmbc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// sweep stage tags for the keyed random streams
constexpr std::uint64_t kStageFb = 1;
constexpr std::uint64_t kStageAux = 2;
constexpr std::uint64_t kStageBeta = 3;
constexpr std::uint64_t kStagePi = 4;
constexpr std::uint64_t kStageTheta = 5;

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v(i) - m);
  return m + std::log(s);
}

Eigen::VectorXd dirichlet(const Eigen::VectorXd& alphas, Rng& rng) {
  Eigen::VectorXd g(alphas.size());
  for (int i = 0; i < alphas.size(); ++i) g(i) = rng.gamma(alphas(i));
  const double s = g.sum();
  if (s <= 0.0) return Eigen::VectorXd::Constant(alphas.size(), 1.0 / alphas.size());
  return g / s;
}

int key_of(const std::vector<int>* map, int k) { return map == nullptr ? k : (*map)[k]; }

// sum in stream-key order so the result is bit-identical under relabeling
double key_ordered_sum(const Eigen::VectorXd& g, const std::vector<int>* map) {
  if (map == nullptr) return g.sum();
  std::vector<int> col_of_key(g.size());
  for (int k = 0; k < g.size(); ++k) col_of_key[(*map)[k]] = k;
  double s = 0.0;
  for (int key = 0; key < g.size(); ++key) s += g(col_of_key[key]);
  return s;
}

Eigen::VectorXd transition_row_alphas(const Eigen::VectorXd& beta, double lambda, double kappa,
                                      const Eigen::MatrixXi& counts, int row) {
  Eigen::VectorXd a = lambda * beta;
  a(row) += kappa;
  for (int k = 0; k < a.size(); ++k) a(k) += counts(row, k);
  return a;
}

}  // namespace

void HdpHyperParams::validate() const {
  if (lambda <= 0.0) throw std::invalid_argument("HdpHyperParams: lambda must be positive");
  if (psi <= 0.0) throw std::invalid_argument("HdpHyperParams: psi must be positive");
  if (kappa < 0.0) throw std::invalid_argument("HdpHyperParams: kappa must be nonnegative");
  if (truncation < 1) throw std::invalid_argument("HdpHyperParams: truncation must be >= 1");
  if (ar_order < 1) throw std::invalid_argument("HdpHyperParams: ar_order must be >= 1");
}

Eigen::MatrixXd sample_transition_rows(const Eigen::VectorXd& beta, double lambda, double kappa,
                                       const Eigen::MatrixXi& counts, Rng& rng) {
  const int L = static_cast<int>(beta.size());
  if (std::abs(beta.sum() - 1.0) > 1e-8 || beta.minCoeff() < 0.0)
    throw std::invalid_argument("sample_transition_rows: beta is not a probability vector");
  if (counts.rows() != L || counts.cols() != L)
    throw std::invalid_argument("sample_transition_rows: counts shape mismatch");
  Eigen::MatrixXd pi(L, L);
  for (int j = 0; j < L; ++j)
    pi.row(j) = dirichlet(transition_row_alphas(beta, lambda, kappa, counts, j), rng).transpose();
  return pi;
}

Eigen::VectorXd sample_global_weights(const Eigen::MatrixXi& aux_counts, double psi, Rng& rng) {
  const int L = static_cast<int>(aux_counts.cols());
  Eigen::VectorXd alphas = Eigen::VectorXd::Constant(L, psi / L);
  for (int k = 0; k < L; ++k) alphas(k) += aux_counts.col(k).sum();
  return dirichlet(alphas, rng);
}

int sample_crp_table_count(int n, double concentration, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_crp_table_count: n must be nonnegative");
  if (n == 0) return 0;
  int tables = 1;  // first customer always opens a table
  for (int i = 1; i < n; ++i)
    if (rng.bernoulli(concentration / (concentration + i))) ++tables;
  return tables;
}

Eigen::MatrixXi sample_aux_counts(const Eigen::MatrixXi& transition_counts, const Eigen::VectorXd& beta,
                                  double lambda, double kappa, Rng& rng) {
  const int L = static_cast<int>(beta.size());
  Eigen::MatrixXi aux(L, L);
  for (int j = 0; j < L; ++j)
    for (int k = 0; k < L; ++k) {
      const double conc = lambda * beta(k) + (j == k ? kappa : 0.0);
      aux(j, k) = sample_crp_table_count(transition_counts(j, k), conc, rng);
    }
  return aux;
}

namespace {

// Shared backward pass: bmsg(t, i) = log p(y_{t+1..T-1} | z_t = i)
Eigen::MatrixXd backward_messages(const Eigen::MatrixXd& log_pi, const Eigen::MatrixXd& ll) {
  const int T = static_cast<int>(ll.rows());
  const int L = static_cast<int>(ll.cols());
  Eigen::MatrixXd bmsg = Eigen::MatrixXd::Zero(T, L);
  Eigen::VectorXd work(L);
  for (int t = T - 2; t >= 0; --t)
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) work(j) = log_pi(i, j) + ll(t + 1, j) + bmsg(t + 1, j);
      bmsg(t, i) = log_sum_exp(work);
    }
  return bmsg;
}

void check_likelihood_rows(const Eigen::MatrixXd& ll) {
  for (int t = 0; t < ll.rows(); ++t) {
    bool any = false;
    for (int j = 0; j < ll.cols(); ++j)
      if (ll(t, j) > kNegInf && !std::isnan(ll(t, j))) any = true;
    if (!any)
      throw std::runtime_error("forward_backward: all-impossible likelihood row at t=" + std::to_string(t));
  }
}

}  // namespace

ModeSequence forward_backward_sample(const Eigen::MatrixXd& transition, const Eigen::VectorXd& init_dist,
                                     const Eigen::MatrixXd& log_likelihoods, const StreamRng& rng,
                                     const std::vector<int>* mode_keys) {
  const int T = static_cast<int>(log_likelihoods.rows());
  const int L = static_cast<int>(log_likelihoods.cols());
  if (transition.rows() != L || transition.cols() != L || init_dist.size() != L)
    throw std::invalid_argument("forward_backward_sample: shape mismatch");
  check_likelihood_rows(log_likelihoods);

  const Eigen::MatrixXd log_pi = transition.array().log().matrix();
  const Eigen::MatrixXd bmsg = backward_messages(log_pi, log_likelihoods);

  ModeSequence out;
  out.labels.resize(T);
  int prev = -1;
  for (int t = 0; t < T; ++t) {
    int best = -1;
    double best_score = kNegInf;
    for (int i = 0; i < L; ++i) {
      const double w = (t == 0 ? std::log(init_dist(i)) : log_pi(prev, i)) + log_likelihoods(t, i) + bmsg(t, i);
      if (w == kNegInf) continue;
      const double score = w + rng.gumbel(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(key_of(mode_keys, i)));
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    if (best < 0) throw std::runtime_error("forward_backward_sample: no admissible mode at t=" + std::to_string(t));
    out.labels[t] = best;
    prev = best;
  }
  return out;
}

ModeSequence viterbi(const Eigen::MatrixXd& transition, const Eigen::VectorXd& init_dist,
                     const Eigen::MatrixXd& log_likelihoods) {
  const int T = static_cast<int>(log_likelihoods.rows());
  const int L = static_cast<int>(log_likelihoods.cols());
  if (transition.rows() != L || transition.cols() != L || init_dist.size() != L)
    throw std::invalid_argument("viterbi: shape mismatch");
  check_likelihood_rows(log_likelihoods);

  const Eigen::MatrixXd log_pi = transition.array().log().matrix();
  Eigen::MatrixXd score(T, L);
  Eigen::MatrixXi back(T, L);
  for (int i = 0; i < L; ++i) score(0, i) = std::log(init_dist(i)) + log_likelihoods(0, i);
  for (int t = 1; t < T; ++t)
    for (int j = 0; j < L; ++j) {
      int arg = 0;
      double best = kNegInf;
      for (int i = 0; i < L; ++i) {
        const double s = score(t - 1, i) + log_pi(i, j);
        if (s > best) {  // strict: ties keep the lower index
          best = s;
          arg = i;
        }
      }
      score(t, j) = best + log_likelihoods(t, j);
      back(t, j) = arg;
    }

  ModeSequence out;
  out.labels.resize(T);
  int arg = 0;
  double best = kNegInf;
  for (int j = 0; j < L; ++j)
    if (score(T - 1, j) > best) {
      best = score(T - 1, j);
      arg = j;
    }
  if (best == kNegInf) throw std::runtime_error("viterbi: no admissible path");
  out.labels[T - 1] = arg;
  for (int t = T - 1; t > 0; --t) out.labels[t - 1] = back(t, out.labels[t]);
  return out;
}

Eigen::MatrixXd mode_log_likelihoods(const TimeSeries& data, const std::vector<ArModeParams>& modes,
                                     int ar_order) {
  const int T = data.length();
  const int L = static_cast<int>(modes.size());
  Eigen::MatrixXd ll = Eigen::MatrixXd::Zero(T, L);
  Window window;
  for (int t = 0; t < T; ++t) {
    if (t >= ar_order)
      for (int k = 0; k < L; ++k) ll(t, k) = ar_log_likelihood(modes[k], window, data.values.row(t).transpose());
    window.push_back(data.values.row(t).transpose());
    if (static_cast<int>(window.size()) > ar_order) window.erase(window.begin());
  }
  return ll;
}

Eigen::MatrixXi transition_counts(const ModeSequence& modes, int truncation) {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(truncation, truncation);
  for (int t = 0; t + 1 < modes.length(); ++t) ++counts(modes.labels[t], modes.labels[t + 1]);
  return counts;
}

namespace {

// conditional posterior draw of one mode's dynamics given the current labels;
// an unoccupied mode falls back to a prior draw
ArModeParams sample_mode_dynamics(const ModeSequence& modes, const TimeSeries& data,
                                  const HdpHyperParams& hp, int k, Rng& rng) {
  const int r = hp.ar_order;
  const int d = data.dim();
  std::vector<int> assigned;
  for (int t = r; t < data.length(); ++t)
    if (modes.labels[t] == k) assigned.push_back(t);
  const int n = static_cast<int>(assigned.size());
  ArRegressionData reg;
  reg.X.resize(n, d * r);
  reg.Y.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const int t = assigned[i];
    for (int l = 0; l < r; ++l) reg.X.row(i).segment(l * d, d) = data.values.row(t - 1 - l);
    reg.Y.row(i) = data.values.row(t);
  }
  return sample_mode_params(mniw_posterior(hp.emission_prior, reg), rng);
}

}  // namespace

GibbsState gibbs_sweep(const GibbsState& state, const TimeSeries& data, const StreamRng& master,
                       const std::vector<int>* mode_key_map) {
  const HdpHyperParams& hp = state.model.hypers;
  const int L = hp.truncation;
  const int r = hp.ar_order;
  const int T = data.length();
  if (state.model.num_modes() != L)
    throw std::runtime_error("gibbs_sweep: model mode count does not match truncation");

  const StreamRng sweep_rng = master.fork(static_cast<std::uint64_t>(state.iteration + 1));
  GibbsState next = state;
  next.iteration = state.iteration + 1;

  // (1)-(2) joint mode path
  const Eigen::MatrixXd ll = mode_log_likelihoods(data, state.model.modes, r);
  try {
    next.modes = forward_backward_sample(state.model.transition, state.model.global_weights, ll,
                                         sweep_rng.fork(kStageFb), mode_key_map);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("gibbs_sweep[mode-path]: ") + e.what());
  }

  // (3)-(4) transition and CRF table counts
  const Eigen::MatrixXi counts = transition_counts(next.modes, L);
  for (int j = 0; j < L; ++j)
    for (int k = 0; k < L; ++k) {
      const double conc = hp.lambda * state.model.global_weights(k) + (j == k ? hp.kappa : 0.0);
      Rng cell = sweep_rng.stream(kStageAux, key_of(mode_key_map, j), key_of(mode_key_map, k));
      next.aux_counts(j, k) = sample_crp_table_count(counts(j, k), conc, cell);
    }

  // (5) shared weights
  {
    Eigen::VectorXd g(L);
    for (int k = 0; k < L; ++k) {
      Rng cell = sweep_rng.stream(kStageBeta, key_of(mode_key_map, k));
      g(k) = cell.gamma(hp.psi / L + next.aux_counts.col(k).sum());
    }
    next.model.global_weights = g / key_ordered_sum(g, mode_key_map);
  }

  // (6) transition rows
  for (int j = 0; j < L; ++j) {
    Eigen::VectorXd g(L);
    for (int k = 0; k < L; ++k) {
      Rng cell = sweep_rng.stream(kStagePi, key_of(mode_key_map, j), key_of(mode_key_map, k));
      const double alpha = hp.lambda * next.model.global_weights(k) + (j == k ? hp.kappa : 0.0) + counts(j, k);
      g(k) = cell.gamma(alpha);
    }
    next.model.transition.row(j) = (g / key_ordered_sum(g, mode_key_map)).transpose();
  }

  // (7) per-mode dynamics; unoccupied modes refresh from the prior
  for (int k = 0; k < L; ++k) {
    Rng cell = sweep_rng.stream(kStageTheta, key_of(mode_key_map, k));
    try {
      next.model.modes[k] = sample_mode_dynamics(next.modes, data, hp, k, cell);
    } catch (const std::exception& e) {
      throw std::runtime_error("gibbs_sweep[mode-params, mode " + std::to_string(k) + "]: " + e.what());
    }
  }
  return next;
}

GibbsState init_gibbs_state(const TimeSeries& data, const HdpHyperParams& hypers, const StreamRng& master) {
  hypers.validate();
  const int L = hypers.truncation;
  const StreamRng init_rng = master.fork(0ULL);

  GibbsState state;
  state.model.hypers = hypers;
  state.aux_counts = Eigen::MatrixXi::Zero(L, L);
  {
    Eigen::VectorXd g(L);
    for (int k = 0; k < L; ++k) {
      Rng cell = init_rng.stream(kStageBeta, k);
      g(k) = cell.gamma(hypers.psi / L + 1.0);  // +1 keeps the initial weights well away from zero
    }
    state.model.global_weights = g / g.sum();
  }
  state.model.transition.resize(L, L);
  for (int j = 0; j < L; ++j) {
    Eigen::VectorXd g(L);
    for (int k = 0; k < L; ++k) {
      Rng cell = init_rng.stream(kStagePi, j, k);
      g(k) = cell.gamma(hypers.lambda * state.model.global_weights(k) + (j == k ? hypers.kappa : 0.0));
    }
    state.model.transition.row(j) = (g / g.sum()).transpose();
  }
  // striped initial labels: every mode starts occupied on one contiguous
  // chunk, so the first sweep sees differentiated dynamics instead of having
  // to grow modes from a cold start
  state.modes.labels.resize(data.length());
  const int block = std::max(1, data.length() / L);
  for (int t = 0; t < data.length(); ++t) state.modes.labels[t] = (t / block) % L;
  state.model.modes.resize(L);
  for (int k = 0; k < L; ++k) {
    Rng cell = init_rng.stream(kStageTheta, k);
    state.model.modes[k] = sample_mode_dynamics(state.modes, data, hypers, k, cell);
  }
  state.iteration = 0;
  return state;
}

namespace {

double joint_log_likelihood(const GibbsState& state, const TimeSeries& data) {
  const int r = state.model.hypers.ar_order;
  const int T = data.length();
  double ll = 0.0;
  Window window;
  for (int t = 0; t < T; ++t) {
    if (t >= r)
      ll += ar_log_likelihood(state.model.modes[state.modes.labels[t]], window, data.values.row(t).transpose());
    window.push_back(data.values.row(t).transpose());
    if (static_cast<int>(window.size()) > r) window.erase(window.begin());
  }
  for (int t = 0; t + 1 < T; ++t)
    ll += std::log(state.model.transition(state.modes.labels[t], state.modes.labels[t + 1]));
  return ll;
}

int occupied_mode_count(const ModeSequence& modes, int truncation) {
  std::vector<int> occ(truncation, 0);
  for (int lab : modes.labels) ++occ[lab];
  const double floor = 0.01 * modes.length();
  int n = 0;
  for (int c : occ)
    if (c > floor) ++n;
  return n;
}

}  // namespace

FitResult fit(const TimeSeries& data, const HdpHyperParams& hypers, int sweeps, int burn_in,
              std::uint64_t seed) {
  if (burn_in < 0 || sweeps <= burn_in) throw std::invalid_argument("fit: need sweeps > burn_in >= 0");
  HdpHyperParams hp = hypers;
  hp.validate();
  if (hp.emission_prior.dim() == 0) {
    hp.emission_prior = MniwPrior::default_prior(data.dim(), hp.ar_order);
    // scale the IW prior to the data: first differences bound the innovation
    // size, so prior draws for empty modes land at a competitive noise level
    double s = 0.0;
    for (int t = 1; t < data.length(); ++t)
      s += (data.values.row(t) - data.values.row(t - 1)).squaredNorm();
    s /= std::max(1, (data.length() - 1) * data.dim());
    if (s > 0.0 && std::isfinite(s))
      hp.emission_prior.iw_scale = 0.1 * s * Eigen::MatrixXd::Identity(data.dim(), data.dim());
  }
  if (data.length() < hp.ar_order + 2)
    throw std::invalid_argument("fit: series shorter than ar_order + 2");
  data.validate();

  const StreamRng master(seed);
  GibbsState state = init_gibbs_state(data, hp, master);

  FitResult result;
  result.diagnostics.sweeps = sweeps;
  result.diagnostics.burn_in = burn_in;
  result.diagnostics.seed = seed;
  for (int i = 0; i < sweeps; ++i) {
    state = gibbs_sweep(state, data, master);
    result.diagnostics.occupied_modes.push_back(occupied_mode_count(state.modes, hp.truncation));
    result.diagnostics.joint_log_lik.push_back(joint_log_likelihood(state, data));
  }
  // last post-burn-in sample is the broadcast snapshot
  result.model = state.model;
  result.modes = state.modes;
  return result;
}

}  // namespace sldsmbc
