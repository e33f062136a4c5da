#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <unistd.h>

#include "sldsmbc/io.hpp"

using namespace sldsmbc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sldsmbc_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

SwitchingArModel fitted_model() {
  SynthSpec spec;
  spec.steps = 200;
  spec.segment_len = 100;
  spec.n_modes = 2;
  spec.seed = 17;
  const auto [trip, labels] = generate_synthetic_trip(spec);
  HdpHyperParams hypers;
  hypers.truncation = 5;
  return fit(trip, hypers, 20, 10, 3).model;
}

}  // namespace

TEST_CASE("generate_synthetic_trip") {
  SynthSpec spec;
  spec.seed = 7;
  const auto [trip, labels] = generate_synthetic_trip(spec);
  CHECK(trip.length() == spec.steps);
  CHECK(labels.length() == spec.steps);
  CHECK(trip.dim() == 1);
  trip.validate();  // uniform grid, finite values

  SUBCASE("timestamps follow dt") {
    CHECK(trip.timestamps[0] == 0.0);
    CHECK(trip.timestamps[1] == doctest::Approx(spec.dt));
    CHECK(trip.timestamps.back() == doctest::Approx(spec.dt * (spec.steps - 1)));
  }
  SUBCASE("labels change exactly at segment boundaries") {
    for (int t = 1; t < spec.steps; ++t) {
      const bool boundary = t % spec.segment_len == 0;
      CHECK((labels.labels[t] != labels.labels[t - 1]) == boundary);
    }
    CHECK(labels.labels[0] == 0);
    CHECK(labels.labels[spec.segment_len] == 1);
  }
  SUBCASE("deterministic in the seed") {
    const auto [trip2, labels2] = generate_synthetic_trip(spec);
    CHECK(trip2.values == trip.values);
    CHECK(labels2.labels == labels.labels);
    SynthSpec other = spec;
    other.seed = 8;
    CHECK(generate_synthetic_trip(other).first.values != trip.values);
  }
  SUBCASE("duration check: 600 samples at 0.1 s span 59.9 s") {
    SynthSpec s600 = spec;
    s600.steps = 600;
    const auto [t600, l600] = generate_synthetic_trip(s600);
    CHECK(t600.timestamps.back() == doctest::Approx(59.9));
  }
}

TEST_CASE("trip CSV round trip is exact") {
  TempDir dir;
  SynthSpec spec;
  spec.steps = 120;
  spec.seed = 3;
  spec.dim = 2;
  const auto [trip, labels] = generate_synthetic_trip(spec);
  const std::string path = dir.file("trip.csv");
  write_trip_csv(trip, path);
  const TimeSeries back = load_trip(path);
  CHECK(back.channels == trip.channels);
  CHECK(back.timestamps == trip.timestamps);
  CHECK(back.values == trip.values);  // %.17g preserves every bit
}

TEST_CASE("load_trip error reporting") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");

  SUBCASE("missing file") { CHECK_THROWS_AS(load_trip(dir.file("nope.csv")), std::runtime_error); }
  SUBCASE("missing time column") {
    write_text(path, "speed\n1.0\n");
    CHECK_THROWS_WITH_AS(load_trip(path), doctest::Contains("time_s"), std::runtime_error);
  }
  SUBCASE("no signal columns") {
    write_text(path, "time_s\n0.0\n");
    CHECK_THROWS_AS(load_trip(path), std::runtime_error);
  }
  SUBCASE("blank cell names the row") {
    write_text(path, "time_s,speed\n0.0,1.0\n0.1,\n");
    CHECK_THROWS_WITH_AS(load_trip(path), doctest::Contains("row 2"), std::runtime_error);
  }
  SUBCASE("non-numeric cell") {
    write_text(path, "time_s,speed\n0.0,1.0\n0.1,abc\n");
    CHECK_THROWS_AS(load_trip(path), std::runtime_error);
  }
  SUBCASE("ragged row") {
    write_text(path, "time_s,speed\n0.0,1.0\n0.1,2.0,3.0\n");
    CHECK_THROWS_AS(load_trip(path), std::runtime_error);
  }
  SUBCASE("empty file") {
    write_text(path, "");
    CHECK_THROWS_AS(load_trip(path), std::runtime_error);
  }
}

TEST_CASE("snapshot JSON round trip is lossless") {
  TempDir dir;
  const SwitchingArModel model = fitted_model();
  const std::string path = dir.file("snap.json");
  write_snapshot(model, path, /*seed=*/3, /*sweeps=*/20, "deadbeef");
  const SwitchingArModel back = read_snapshot(path);

  CHECK(back.global_weights == model.global_weights);
  CHECK(back.transition == model.transition);
  REQUIRE(back.num_modes() == model.num_modes());
  for (int k = 0; k < model.num_modes(); ++k) {
    REQUIRE(back.modes[k].lag_matrices.size() == model.modes[k].lag_matrices.size());
    for (std::size_t l = 0; l < model.modes[k].lag_matrices.size(); ++l)
      CHECK(back.modes[k].lag_matrices[l] == model.modes[k].lag_matrices[l]);
    CHECK(back.modes[k].noise_cov == model.modes[k].noise_cov);
  }
  CHECK(back.hypers.lambda == model.hypers.lambda);
  CHECK(back.hypers.kappa == model.hypers.kappa);
  CHECK(back.hypers.ar_order == model.hypers.ar_order);
  CHECK(back.hypers.truncation == model.hypers.truncation);
}

TEST_CASE("read_snapshot rejects malformed input") {
  TempDir dir;
  const std::string path = dir.file("snap.json");

  SUBCASE("missing file") { CHECK_THROWS_AS(read_snapshot(dir.file("nope.json")), std::runtime_error); }
  SUBCASE("not JSON") {
    write_text(path, "this is not json {");
    CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
  }
  SUBCASE("wrong format version") {
    write_text(path, R"({"format_version":"99"})");
    CHECK_THROWS_WITH_AS(read_snapshot(path), doctest::Contains("format_version"), std::runtime_error);
  }
  SUBCASE("truncated document") {
    const SwitchingArModel model = fitted_model();
    write_snapshot(model, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    write_text(path, text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
  }
  SUBCASE("inconsistent dimensions") {
    const SwitchingArModel model = fitted_model();
    write_snapshot(model, path);
    std::ifstream in(path);
    auto j = nlohmann::json::parse(in);
    j["transition"].erase(0);  // drop a row
    in.close();
    write_text(path, j.dump());
    CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
  }
}

TEST_CASE("trace CSV round trip") {
  TempDir dir;
  SimTrace trace;
  trace.time = {0.0, 0.1, 0.2};
  trace.delivered = {1, 0, 1};
  trace.mbc_error = {0.125, 1.0 / 3.0, 0.0};
  trace.baseline_error = {0.0, 0.5, 2e-17};
  trace.mode_labels = {0, 0, 2};
  const std::string path = dir.file("trace.csv");
  write_trace_csv(trace, path);
  const SimTrace back = read_trace_csv(path);
  CHECK(back.time == trace.time);
  CHECK(back.delivered == trace.delivered);
  CHECK(back.mbc_error == trace.mbc_error);
  CHECK(back.baseline_error == trace.baseline_error);
  CHECK(back.mode_labels == trace.mode_labels);

  SUBCASE("header is the documented one") {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "time_s,delivered,mbc_error,baseline_error,mode");
  }
}

TEST_CASE("ecdf CSV merges both curves on a shared threshold grid") {
  TempDir dir;
  const Ecdf mbc = error_ecdf({0.1, 0.2, 0.3, 0.4});
  const Ecdf base = error_ecdf({0.2, 0.5});
  const std::string path = dir.file("ecdf.csv");
  write_ecdf_csv(mbc, base, path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "threshold,ecdf_mbc,ecdf_baseline");
  int rows = 0;
  double thr, a, b;
  char comma;
  std::string line;
  double last_a = -1.0, last_b = -1.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> thr >> comma >> a >> comma >> b;
    CHECK(a == ecdf_at(mbc, thr));
    CHECK(b == ecdf_at(base, thr));
    CHECK(a >= last_a);
    CHECK(b >= last_b);
    last_a = a;
    last_b = b;
    ++rows;
  }
  CHECK(rows == 5);  // union of {0.1,0.2,0.3,0.4} and {0.2,0.5}
  CHECK(last_a == 1.0);
  CHECK(last_b == 1.0);
}

TEST_CASE("labels CSV format") {
  TempDir dir;
  ModeSequence modes;
  modes.labels = {0, 1, 1};
  const std::string path = dir.file("labels.csv");
  write_labels_csv({0.0, 0.1, 0.2}, modes, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "time_s,mode");
  std::getline(in, line);
  CHECK(line == "0,0");
  std::getline(in, line);
  CHECK(line == "0.10000000000000001,1");
}
