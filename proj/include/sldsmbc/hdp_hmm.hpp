#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sldsmbc/ar.hpp"
#include "sldsmbc/random.hpp"

namespace sldsmbc {

struct HdpHyperParams {
  double lambda = 1.0;  // lower-level DP concentration
  double psi = 1.0;     // top-level DP concentration
  double kappa = 50.0;  // sticky self-transition bias
  int truncation = 20;  // weak-limit mode budget L
  MniwPrior emission_prior;
  int ar_order = 2;

  void validate() const;
};

// The fitted switching-AR model: shared mode weights, sticky transition
// matrix, and per-mode dynamics.
struct SwitchingArModel {
  Eigen::VectorXd global_weights;  // beta, length L
  Eigen::MatrixXd transition;      // L x L, row-stochastic
  std::vector<ArModeParams> modes;
  HdpHyperParams hypers;

  int num_modes() const { return static_cast<int>(modes.size()); }
};

struct ModeSequence {
  std::vector<int> labels;

  int length() const { return static_cast<int>(labels.size()); }
};

struct GibbsState {
  SwitchingArModel model;
  ModeSequence modes;
  Eigen::MatrixXi aux_counts;  // CRF table counts
  int iteration = 0;
};

// Row j ~ Dirichlet(lambda*beta + kappa*e_j + counts[j]) — the weak-limit
// form of the sticky HDP transition prior.
Eigen::MatrixXd sample_transition_rows(const Eigen::VectorXd& beta, double lambda, double kappa,
                                       const Eigen::MatrixXi& counts, Rng& rng);

// beta ~ Dirichlet(psi/L + column sums of aux_counts)
Eigen::VectorXd sample_global_weights(const Eigen::MatrixXi& aux_counts, double psi, Rng& rng);

// Table counts of a CRP with transition_counts[j][k] customers and
// concentration lambda*beta_k (+kappa on the diagonal).
Eigen::MatrixXi sample_aux_counts(const Eigen::MatrixXi& transition_counts, const Eigen::VectorXd& beta,
                                  double lambda, double kappa, Rng& rng);

// Number of tables opened by a CRP with n customers and the given
// concentration; one Bernoulli per arriving customer.
int sample_crp_table_count(int n, double concentration, Rng& rng);

// Joint draw of the hidden mode path by backward messages + forward
// sampling, all in log space. Categorical draws use Gumbel-max keyed by
// (t, mode), which keeps the sweep equivariant under mode relabeling.
ModeSequence forward_backward_sample(const Eigen::MatrixXd& transition, const Eigen::VectorXd& init_dist,
                                     const Eigen::MatrixXd& log_likelihoods, const StreamRng& rng,
                                     const std::vector<int>* mode_keys = nullptr);

// Max-probability path; ties break toward the lower mode index.
ModeSequence viterbi(const Eigen::MatrixXd& transition, const Eigen::VectorXd& init_dist,
                     const Eigen::MatrixXd& log_likelihoods);

// Per-mode log-likelihood matrix for a series (rows before ar_order are zero).
Eigen::MatrixXd mode_log_likelihoods(const TimeSeries& data, const std::vector<ArModeParams>& modes,
                                     int ar_order);

Eigen::MatrixXi transition_counts(const ModeSequence& modes, int truncation);

// One full blocked sweep. `mode_key_map`, when given, remaps the per-mode
// random substream keys (identity by default); used to verify relabeling
// equivariance.
GibbsState gibbs_sweep(const GibbsState& state, const TimeSeries& data, const StreamRng& master,
                       const std::vector<int>* mode_key_map = nullptr);

struct FitDiagnostics {
  std::vector<int> occupied_modes;     // per sweep, occupancy > 1% of T
  std::vector<double> joint_log_lik;   // per sweep
  int sweeps = 0;
  int burn_in = 0;
  std::uint64_t seed = 0;
};

struct FitResult {
  SwitchingArModel model;
  ModeSequence modes;
  FitDiagnostics diagnostics;
};

GibbsState init_gibbs_state(const TimeSeries& data, const HdpHyperParams& hypers, const StreamRng& master);

FitResult fit(const TimeSeries& data, const HdpHyperParams& hypers, int sweeps, int burn_in,
              std::uint64_t seed);

}  // namespace sldsmbc
