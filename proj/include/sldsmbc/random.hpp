#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sldsmbc {

// splitmix64 mixer; also the backbone of tag-keyed streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Self-contained generator: all distributions are implemented here so that
// output is reproducible from a 64-bit seed independent of the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t raw() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // uniform on (0,1), never exactly 0 or 1
  double uniform() { return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Marsaglia-Tsang; shape < 1 handled via the boost u^(1/a)
  double gamma(double shape, double scale = 1.0) {
    if (shape <= 0.0 || scale <= 0.0) throw std::invalid_argument("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
  }

  double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }

  // Beta(1, lambda) by inverse CDF: v = 1 - u^(1/lambda), clamped into the
  // open interval (the endpoints are reachable only through rounding)
  double beta_one(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("beta_one: lambda must be positive");
    const double v = 1.0 - std::pow(uniform(), 1.0 / lambda);
    constexpr double lo = 0x1.0p-60;
    const double hi = 1.0 - 0x1.0p-53;
    return v < lo ? lo : (v > hi ? hi : v);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

// Counter-style source of independent substreams addressed by integer tags.
// Draws keyed by the same tags are identical across runs, and independent of
// how many draws any other substream consumed.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : seed_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  template <class... Tags>
  std::uint64_t key(Tags... tags) const {
    std::uint64_t h = seed_;
    ((h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(tags) + 0x9e3779b97f4a7c15ULL))), ...);
    return h;
  }

  template <class... Tags>
  Rng stream(Tags... tags) const {
    return Rng(key(static_cast<std::uint64_t>(tags)...));
  }

  // one uniform in (0,1) from the tagged substream
  template <class... Tags>
  double uniform(Tags... tags) const {
    Rng r = stream(tags...);
    return r.uniform();
  }

  template <class... Tags>
  double gumbel(Tags... tags) const {
    Rng r = stream(tags...);
    return -std::log(-std::log(r.uniform()));
  }

  template <class... Tags>
  StreamRng fork(Tags... tags) const {
    StreamRng sub(*this);
    sub.seed_ = key(static_cast<std::uint64_t>(tags)...);
    return sub;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace sldsmbc
