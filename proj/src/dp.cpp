#include "sldsmbc/dp.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sldsmbc {

StickWeights stick_weights_from_fractions(std::vector<double> fractions, int truncation) {
  if (truncation < 1) throw std::invalid_argument("stick_weights_from_fractions: truncation must be >= 1");
  if (static_cast<int>(fractions.size()) < truncation)
    throw std::invalid_argument("stick_weights_from_fractions: need at least `truncation` fractions");
  fractions.resize(truncation);
  for (int k = 0; k + 1 < truncation; ++k) {
    if (!(fractions[k] > 0.0 && fractions[k] < 1.0))
      throw std::invalid_argument("stick_weights_from_fractions: fraction " + std::to_string(k) +
                                  " outside (0,1)");
  }
  fractions.back() = 1.0;  // last stick absorbs the residual mass

  StickWeights out;
  out.truncation = truncation;
  out.weights.resize(truncation);
  double remaining = 1.0;
  for (int k = 0; k < truncation; ++k) {
    out.weights[k] = fractions[k] * remaining;
    remaining *= (1.0 - fractions[k]);
  }
  out.fractions = std::move(fractions);
  return out;
}

StickWeights sample_stick_weights(double concentration, int truncation, Rng& rng) {
  if (concentration <= 0.0) throw std::invalid_argument("sample_stick_weights: concentration must be positive");
  if (truncation < 1) throw std::invalid_argument("sample_stick_weights: truncation must be >= 1");
  std::vector<double> fractions(truncation);
  for (int k = 0; k < truncation; ++k) fractions[k] = rng.beta_one(concentration);
  return stick_weights_from_fractions(std::move(fractions), truncation);
}

int CrpState::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

int crp_assign(CrpState& state, Rng& rng) {
  if (state.concentration <= 0.0) throw std::invalid_argument("crp_assign: concentration must be positive");
  const double n = static_cast<double>(state.total());
  const double denom = n + state.concentration;
  double u = rng.uniform() * denom;
  for (std::size_t j = 0; j < state.counts.size(); ++j) {
    u -= state.counts[j];
    if (u < 0.0) {
      ++state.counts[j];
      return static_cast<int>(j);
    }
  }
  state.counts.push_back(1);
  return static_cast<int>(state.counts.size()) - 1;
}

double crp_log_partition_prob(const std::vector<int>& labels, double concentration) {
  if (concentration <= 0.0) throw std::invalid_argument("crp_log_partition_prob: concentration must be positive");
  std::vector<int> counts;
  double logp = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int lab = labels[i];
    if (lab < 0 || lab > static_cast<int>(counts.size()))
      throw std::invalid_argument("crp_log_partition_prob: label " + std::to_string(lab) + " at position " +
                                  std::to_string(i) + " breaks arrival order");
    const double denom = n + concentration;
    if (lab == static_cast<int>(counts.size())) {
      logp += std::log(concentration / denom);
      counts.push_back(1);
    } else {
      logp += std::log(counts[lab] / denom);
      ++counts[lab];
    }
    ++n;
  }
  return logp;
}

}  // namespace sldsmbc
