#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "gazehmm/geometry.hpp"

namespace gazehmm {

/// Deterministic random source. std::mt19937_64 is fully specified by the
/// standard; the distributions are hand-rolled so byte-identical output does
/// not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one spare kept between calls.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Draw from N(mean, cov).
  Vec2 gaussian2(Vec2 mean, const Mat2& cov) {
    const Chol2 ch = cholesky(cov);
    const double z1 = normal();
    const double z2 = normal();
    return {mean.x + ch.l11 * z1, mean.y + ch.l21 * z1 + ch.l22 * z2};
  }

  /// Index ~ probs (need not be normalized exactly; tail mass goes to the
  /// last positive entry).
  std::size_t categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_pos = 0;
    bool any = false;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] > 0.0) {
        last_pos = k;
        any = true;
      }
      acc += probs[k];
      if (u < acc) return k;
    }
    if (!any) throw std::invalid_argument("categorical: all-zero distribution");
    return last_pos;
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = std::max(uniform(), 1e-300);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Dirichlet with per-component concentrations.
  std::vector<double> dirichlet(std::span<const double> alpha) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      total += out[i];
    }
    if (total <= 0.0) throw std::runtime_error("dirichlet: degenerate draw");
    for (double& v : out) v /= total;
    return out;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gazehmm
