#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sldsmbc/io.hpp"
#include "sldsmbc/mbc.hpp"

using namespace sldsmbc;

TEST_CASE("simulate_channel limits and concentration") {
  ChannelConfig cfg;
  cfg.seed = 5;

  cfg.per = 0.0;
  for (auto d : simulate_channel(500, cfg)) CHECK(d == 1);
  cfg.per = 1.0;
  for (auto d : simulate_channel(500, cfg)) CHECK(d == 0);

  cfg.per = 0.6;
  const auto mask = simulate_channel(100000, cfg);
  const double frac = std::accumulate(mask.begin(), mask.end(), 0.0) / mask.size();
  CHECK(std::abs(frac - 0.4) < 0.005);

  cfg.per = 1.5;
  CHECK_THROWS_AS(simulate_channel(10, cfg), std::invalid_argument);
}

TEST_CASE("error_ecdf") {
  SUBCASE("hand count") {
    const Ecdf e = error_ecdf({2.0, 1.0, 3.0});
    CHECK(ecdf_at(e, 2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(ecdf_at(e, 0.5) == 0.0);
    CHECK(ecdf_at(e, 3.0) == 1.0);
    CHECK(e.fractions.back() == 1.0);
  }
  SUBCASE("monotone nondecreasing on random inputs") {
    Rng rng(3);
    std::vector<double> errors;
    for (int i = 0; i < 300; ++i) errors.push_back(std::abs(rng.normal()));
    const Ecdf e = error_ecdf(errors);
    for (std::size_t i = 1; i < e.fractions.size(); ++i) {
      CHECK(e.fractions[i] >= e.fractions[i - 1]);
      CHECK(e.thresholds[i] > e.thresholds[i - 1]);
    }
    // evaluates to (count <= t)/n at every sample point
    for (double t : {0.1, 0.7, 1.5}) {
      int count = 0;
      for (double v : errors)
        if (v <= t) ++count;
      CHECK(ecdf_at(e, t) == doctest::Approx(count / double(errors.size())));
    }
  }
  SUBCASE("empty input throws") { CHECK_THROWS_AS(error_ecdf({}), std::invalid_argument); }
}

namespace {

ScenarioConfig fast_config() {
  ScenarioConfig cfg;
  cfg.refit_window = 100;
  cfg.sweeps = 25;
  cfg.burn_in = 10;
  cfg.hypers.truncation = 6;
  cfg.hypers.kappa = 20.0;
  return cfg;
}

TimeSeries test_trip(std::uint64_t seed, int steps = 300) {
  SynthSpec spec;
  spec.steps = steps;
  spec.segment_len = 100;
  spec.n_modes = 2;
  spec.seed = seed;
  return generate_synthetic_trip(spec).first;
}

bool traces_identical(const SimTrace& a, const SimTrace& b) {
  return a.time == b.time && a.delivered == b.delivered && a.mbc_error == b.mbc_error &&
         a.baseline_error == b.baseline_error && a.mode_labels == b.mode_labels;
}

}  // namespace

TEST_CASE("run_scenario determinism") {
  const TimeSeries trip = test_trip(41);
  ScenarioConfig cfg = fast_config();
  cfg.channel.per = 0.5;
  cfg.channel.seed = 9;
  CHECK(traces_identical(run_scenario(trip, cfg), run_scenario(trip, cfg)));
}

TEST_CASE("run_scenario: lossless channel limit") {
  const TimeSeries trip = test_trip(42);
  ScenarioConfig cfg = fast_config();
  cfg.channel.per = 0.0;
  const SimTrace trace = run_scenario(trip, cfg);
  REQUIRE(trace.length() == trip.length() - cfg.refit_window);
  for (int t = 0; t < trace.length(); ++t) {
    REQUIRE(trace.delivered[t] == 1);  // 10 Hz tx on a 10 Hz grid: every step is a packet
    CHECK(trace.baseline_error[t] == 0.0);
    CHECK(trace.mbc_error[t] >= 0.0);
  }

  // mask constant at per=0: changing the channel seed changes nothing
  ScenarioConfig cfg2 = cfg;
  cfg2.channel.seed = 777;
  CHECK(traces_identical(trace, run_scenario(trip, cfg2)));
}

TEST_CASE("run_scenario: blackout limit") {
  const TimeSeries trip = test_trip(43);
  ScenarioConfig cfg = fast_config();
  cfg.channel.per = 1.0;
  const SimTrace trace = run_scenario(trip, cfg);
  for (int t = 0; t < trace.length(); ++t) CHECK(trace.delivered[t] == 0);

  // baseline holds the last pre-simulation value forever
  const Eigen::VectorXd held = trip.values.row(cfg.refit_window - 1).transpose();
  for (int t = 0; t < trace.length(); ++t) {
    const Eigen::VectorXd y = trip.values.row(cfg.refit_window + t).transpose();
    CHECK(trace.baseline_error[t] == doctest::Approx((y - held).norm()));
  }

  ScenarioConfig cfg2 = cfg;
  cfg2.channel.seed = 12345;
  CHECK(traces_identical(trace, run_scenario(trip, cfg2)));
}

TEST_CASE("run_scenario: fixed horizon holds the last forecast") {
  const TimeSeries trip = test_trip(44);
  ScenarioConfig cfg = fast_config();
  cfg.channel.per = 1.0;
  cfg.horizon_policy = HorizonPolicy::FixedK;
  cfg.fixed_horizon = 5;
  const SimTrace trace = run_scenario(trip, cfg);
  // beyond k steps with no delivery the prediction freezes, so the error
  // equals the distance to a constant
  const SimTrace rolling = [&] {
    ScenarioConfig c = cfg;
    c.horizon_policy = HorizonPolicy::UntilNextDelivery;
    return run_scenario(trip, c);
  }();
  for (int t = 0; t < 5; ++t) CHECK(trace.mbc_error[t] == rolling.mbc_error[t]);
  bool any_diff = false;
  for (int t = 5; t < trace.length(); ++t) any_diff = any_diff || trace.mbc_error[t] != rolling.mbc_error[t];
  CHECK(any_diff);
}

TEST_CASE("run_scenario rejects bad input") {
  ScenarioConfig cfg = fast_config();
  CHECK_THROWS_AS(run_scenario(test_trip(45, 50), cfg), std::invalid_argument);  // shorter than window
  cfg.refit_window = 3;
  CHECK_THROWS_AS(run_scenario(test_trip(45), cfg), std::invalid_argument);  // window too small for AR order
}
