#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sldsmbc/dp.hpp"

using namespace sldsmbc;

TEST_CASE("stick weights from fractions: worked examples") {
  SUBCASE("single stick carries all mass") {
    const auto sw = stick_weights_from_fractions({0.3}, 1);
    REQUIRE(sw.weights.size() == 1);
    CHECK(sw.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("geometric halving, last absorbs residue") {
    const auto sw = stick_weights_from_fractions({0.5, 0.5, 0.5}, 3);
    CHECK(sw.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sw.weights[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sw.weights[2] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("hand recursion") {
    const auto sw = stick_weights_from_fractions({0.2, 0.4, 0.9}, 3);
    CHECK(sw.weights[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(sw.weights[1] == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(sw.weights[2] == doctest::Approx(0.48).epsilon(1e-15));
  }
}

TEST_CASE("stick weights reject bad input") {
  CHECK_THROWS_AS(stick_weights_from_fractions({1.2, 0.5, 0.5}, 3), std::invalid_argument);
  CHECK_THROWS_AS(stick_weights_from_fractions({-0.1, 0.5, 0.5}, 3), std::invalid_argument);
  CHECK_THROWS_AS(stick_weights_from_fractions({0.5}, 0), std::invalid_argument);
  CHECK_THROWS_AS(stick_weights_from_fractions({0.5}, 3), std::invalid_argument);
  Rng rng(1);
  CHECK_THROWS_AS(sample_stick_weights(0.0, 5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stick_weights(-1.0, 5, rng), std::invalid_argument);
}

TEST_CASE("stick weights sum to one for randomized inputs") {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const int L = 1 + static_cast<int>(rng.uniform() * 40);
    std::vector<double> fractions(L);
    for (auto& v : fractions) v = rng.uniform();
    const auto sw = stick_weights_from_fractions(fractions, L);
    double sum = 0.0;
    for (double w : sw.weights) {
      CHECK(w > 0.0);
      CHECK(w <= 1.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // recursion consistency
    double remaining = 1.0;
    for (int k = 0; k < L; ++k) {
      CHECK(std::abs(sw.weights[k] - sw.fractions[k] * remaining) <= 1e-12);
      remaining *= 1.0 - sw.fractions[k];
    }
  }
}

TEST_CASE("sampled stick weights match the Beta(1,lambda) mean") {
  // E[phi_1] = E[v_1] = 1/(1+lambda)
  for (double lambda : {1.0, 0.1}) {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += sample_stick_weights(lambda, 50, rng).weights[0];
    CHECK(std::abs(sum / n - 1.0 / (1.0 + lambda)) < 0.01);
  }
}

TEST_CASE("sampled stick weights with L=1") {
  Rng rng(3);
  const auto sw = sample_stick_weights(5.0, 1, rng);
  CHECK(sw.weights == std::vector<double>{1.0});
}

TEST_CASE("crp_assign: first customer always opens a table") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    CrpState s{{}, 0.01 + rng.uniform() * 10};
    CHECK(crp_assign(s, rng) == 0);
    CHECK(s.counts == std::vector<int>{1});
  }
}

TEST_CASE("crp_assign frequencies match the analytic rule") {
  // counts [2,1], lambda=1 -> 2/4, 1/4, 1/4
  Rng rng(99);
  const int n = 100000;
  int hits[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    CrpState s{{2, 1}, 1.0};
    ++hits[crp_assign(s, rng)];
  }
  CHECK(std::abs(hits[0] / double(n) - 0.50) < 0.01);
  CHECK(std::abs(hits[1] / double(n) - 0.25) < 0.01);
  CHECK(std::abs(hits[2] / double(n) - 0.25) < 0.01);
}

TEST_CASE("crp_assign rejects invalid concentration") {
  Rng rng(1);
  CrpState s{{1}, 0.0};
  CHECK_THROWS_AS(crp_assign(s, rng), std::invalid_argument);
}

TEST_CASE("crp_log_partition_prob: worked examples") {
  CHECK(crp_log_partition_prob({0}, 1.0) == doctest::Approx(0.0));
  CHECK(crp_log_partition_prob({0, 0, 0}, 1.0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
  CHECK(crp_log_partition_prob({0, 1}, 2.0) == doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(crp_log_partition_prob({1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(crp_log_partition_prob({0, 2}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(crp_log_partition_prob({0}, 0.0), std::invalid_argument);
}

namespace {

// all arrival-order label sequences (restricted growth strings) of length n
void enumerate_rgs(int n, std::vector<int>& cur, int max_used, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int lab = 0; lab <= max_used + 1; ++lab) {
    cur.push_back(lab);
    enumerate_rgs(n, cur, std::max(max_used, lab), out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  enumerate_rgs(n, cur, -1, out);
  return out;
}

}  // namespace

TEST_CASE("CRP partition probabilities are exchangeable and normalized") {
  for (int n : {2, 4, 6}) {
    for (double lambda : {0.7, 1.0, 3.0}) {
      const auto partitions = all_partitions(n);
      double total = 0.0;
      // probability of an exact partition must depend only on block sizes
      std::map<std::vector<int>, double> by_shape;
      for (const auto& labels : partitions) {
        const double p = std::exp(crp_log_partition_prob(labels, lambda));
        total += p;
        std::vector<int> sizes(*std::max_element(labels.begin(), labels.end()) + 1, 0);
        for (int lab : labels) ++sizes[lab];
        std::sort(sizes.begin(), sizes.end());
        const auto it = by_shape.find(sizes);
        if (it == by_shape.end())
          by_shape[sizes] = p;
        else
          CHECK(std::abs(it->second - p) < 1e-12);
      }
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("crp_assign empirical partition distribution matches the analytic oracle") {
  const int n_cust = 5;
  const int n_draws = 100000;
  for (double lambda : {0.5, 5.0}) {
    std::map<std::vector<int>, int> freq;
    Rng rng(2024);
    for (int i = 0; i < n_draws; ++i) {
      CrpState s{{}, lambda};
      std::vector<int> labels;
      for (int c = 0; c < n_cust; ++c) labels.push_back(crp_assign(s, rng));
      ++freq[labels];
    }
    double tv = 0.0;
    for (const auto& labels : all_partitions(n_cust)) {
      const double analytic = std::exp(crp_log_partition_prob(labels, lambda));
      const auto it = freq.find(labels);
      const double empirical = it == freq.end() ? 0.0 : it->second / double(n_draws);
      tv += 0.5 * std::abs(analytic - empirical);
    }
    CHECK(tv < 0.02);
  }
}

TEST_CASE("rich get richer: bigger tables attract more customers") {
  // empirical frequency of table 0 strictly increases with counts[0]
  Rng rng(5);
  double prev = -1.0;
  for (int c0 : {1, 3, 6}) {
    int hits = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      CrpState s{{c0, 2, 2}, 1.0};
      if (crp_assign(s, rng) == 0) ++hits;
    }
    const double f = hits / double(n);
    CHECK(f > prev);
    prev = f;
  }
}
