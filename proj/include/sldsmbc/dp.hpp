#pragma once

#include <vector>

#include "sldsmbc/random.hpp"

namespace sldsmbc {

// Truncated stick-breaking weights. The final stick absorbs the residual
// mass, so the weights always form an exact probability vector.
struct StickWeights {
  std::vector<double> fractions;  // v_k, last entry forced to 1
  std::vector<double> weights;    // phi_k, length == truncation
  int truncation = 0;
};

StickWeights stick_weights_from_fractions(std::vector<double> fractions, int truncation);

StickWeights sample_stick_weights(double concentration, int truncation, Rng& rng);

// Occupancy state of a Chinese restaurant process.
struct CrpState {
  std::vector<int> counts;  // per-table occupancy, every entry >= 1
  double concentration = 1.0;

  int total() const;
};

// Seats one customer. Returns the chosen table index; a new table gets index
// counts.size(). The state is updated in place.
int crp_assign(CrpState& state, Rng& rng);

// Exact log-probability of a label sequence under the sequential CRP.
// Labels must be in arrival order: a new label is always the smallest unused.
double crp_log_partition_prob(const std::vector<int>& labels, double concentration);

}  // namespace sldsmbc
