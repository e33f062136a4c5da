#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sldsmbc/hdp_hmm.hpp"
#include "sldsmbc/mbc.hpp"

namespace sldsmbc {

// Trip CSV: header `time_s,<signal>[,<signal>...]`, one row per sample.
TimeSeries load_trip(const std::string& path);
void write_trip_csv(const TimeSeries& series, const std::string& path);

// Truth-label CSV: header `time_s,mode`.
void write_labels_csv(const std::vector<double>& timestamps, const ModeSequence& modes,
                      const std::string& path);

struct SynthSpec {
  int n_modes = 3;
  int steps = 2000;
  int segment_len = 200;
  int ar_order = 2;
  int dim = 1;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
  double dt = 0.1;
};

// Stand-in for real CAN trips: piecewise switching-AR signal with known
// labels. Mode dynamics are damped oscillators derived from the seed.
std::pair<TimeSeries, ModeSequence> generate_synthetic_trip(const SynthSpec& spec);

// Snapshot JSON with format_version "1"; lossless double round-trip.
void write_snapshot(const SwitchingArModel& model, const std::string& path,
                    std::uint64_t seed = 0, int sweeps = 0, const std::string& data_hash = "");
SwitchingArModel read_snapshot(const std::string& path);

// SimTrace CSV: header `time_s,delivered,mbc_error,baseline_error,mode`.
void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(const std::string& path);

// ECDF CSV: header `threshold,ecdf_mbc,ecdf_baseline`.
void write_ecdf_csv(const Ecdf& mbc, const Ecdf& baseline, const std::string& path);

int cli_main(int argc, char** argv);

}  // namespace sldsmbc
