#pragma once

#include <cstdint>
#include <vector>

#include "sldsmbc/forecast.hpp"
#include "sldsmbc/hdp_hmm.hpp"

namespace sldsmbc {

struct ChannelConfig {
  double per = 0.6;       // packet error rate
  std::uint64_t seed = 0;
};

enum class HorizonPolicy { UntilNextDelivery, FixedK };

struct ScenarioConfig {
  double tx_hz = 10.0;              // broadcast rate
  int refit_window = 600;           // trailing samples per model refit
  HorizonPolicy horizon_policy = HorizonPolicy::UntilNextDelivery;
  int fixed_horizon = 10;           // used by FixedK: beyond this the forecast is held
  ChannelConfig channel;
  HdpHyperParams hypers;
  int sweeps = 150;
  int burn_in = 100;
  std::uint64_t fit_seed = 1;
};

// Receiver-side evaluation record, one entry per simulated timestep.
struct SimTrace {
  std::vector<double> time;
  std::vector<std::uint8_t> delivered;
  std::vector<double> mbc_error;
  std::vector<double> baseline_error;
  std::vector<int> mode_labels;  // transmitter-side MAP mode

  int length() const { return static_cast<int>(time.size()); }
};

// i.i.d. Bernoulli(1 - per) delivery mask.
std::vector<std::uint8_t> simulate_channel(int n_packets, const ChannelConfig& config);

// Walks the series: the transmitter refits and broadcasts model snapshots,
// the channel drops packets, the receiver forecasts between deliveries and
// the zero-hold baseline holds the last delivered raw value. The first
// refit_window samples warm up the initial snapshot; errors are recorded
// from there on.
SimTrace run_scenario(const TimeSeries& series, const ScenarioConfig& config);

struct Ecdf {
  std::vector<double> thresholds;  // sorted unique sample values
  std::vector<double> fractions;   // cumulative fractions, last one == 1
};

Ecdf error_ecdf(std::vector<double> errors);

// Right-continuous evaluation: fraction of samples <= t.
double ecdf_at(const Ecdf& ecdf, double t);

}  // namespace sldsmbc
