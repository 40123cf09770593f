#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "gazehmm/bundled.hpp"
#include "gazehmm/vhem.hpp"
#include "oracles.hpp"

using namespace gazehmm;

namespace {

/// Three well-separated ROIs and sticky transitions; the separation makes
/// the variational assignments collapse to deltas in double precision.
GaussianHmm separated_model() {
  GaussianHmm m;
  m.prior = {0.7, 0.2, 0.1};
  m.trans = {{0.90, 0.06, 0.04}, {0.05, 0.90, 0.05}, {0.08, 0.02, 0.90}};
  m.states = {{{100, 100}, Mat2::isotropic(196.0)},
              {{500, 120}, Mat2::isotropic(150.0)},
              {{300, 520}, Mat2{220.0, 30.0, 30.0, 180.0}}};
  return m;
}

double max_param_diff(const GaussianHmm& a, const GaussianHmm& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.n_states(); ++k) {
    d = std::max(d, std::abs(a.prior[k] - b.prior[k]));
    d = std::max(d, std::abs(a.states[k].mean.x - b.states[k].mean.x));
    d = std::max(d, std::abs(a.states[k].mean.y - b.states[k].mean.y));
    d = std::max(d, std::abs(a.states[k].cov.a - b.states[k].cov.a));
    d = std::max(d, std::abs(a.states[k].cov.b - b.states[k].cov.b));
    d = std::max(d, std::abs(a.states[k].cov.d - b.states[k].cov.d));
    for (std::size_t j = 0; j < a.n_states(); ++j) {
      d = std::max(d, std::abs(a.trans[k][j] - b.trans[k][j]));
    }
  }
  return d;
}

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

McEstimate mc_expected_loglik(const GaussianHmm& base, const GaussianHmm& reduced, std::size_t tau,
                              std::size_t n_draws, std::uint64_t seed) {
  Rng rng(seed);
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const auto draw = sample(base, tau, rng);
    const double ll = log_likelihood(reduced, draw.points);
    acc += ll;
    acc2 += ll * ll;
  }
  McEstimate est;
  est.mean = acc / static_cast<double>(n_draws);
  const double var = acc2 / static_cast<double>(n_draws) - est.mean * est.mean;
  est.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n_draws));
  return est;
}

}  // namespace

TEST_CASE("expected_gauss_loglik: closed-form values") {
  const GaussianState std_gauss{{0, 0}, Mat2::identity()};
  CHECK(expected_gauss_loglik(std_gauss, std_gauss) ==
        Catch::Approx(-2.8378770664093453).epsilon(1e-12));
  const GaussianState shifted{{1, 0}, Mat2::identity()};
  CHECK(expected_gauss_loglik(shifted, std_gauss) ==
        Catch::Approx(-3.3378770664093453).epsilon(1e-12));
  CHECK_THROWS(expected_gauss_loglik(std_gauss, GaussianState{{0, 0}, Mat2{1, 1, 1, 1}}));
}

TEST_CASE("expected_gauss_loglik: Monte-Carlo agreement") {
  Rng rng(404);
  for (int round = 0; round < 3; ++round) {
    const auto mb = oracle::random_model(rng, 1);
    const auto mr = oracle::random_model(rng, 1);
    const double want = expected_gauss_loglik(mb.states[0], mr.states[0]);
    Rng draws(900 + round);
    double acc = 0.0, acc2 = 0.0;
    const std::size_t n = 1000000;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 y = draws.gaussian2(mb.states[0].mean, mb.states[0].cov);
      const double ll = gaussian_logpdf(y, mr.states[0].mean, mr.states[0].cov);
      acc += ll;
      acc2 += ll * ll;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(want == Catch::Approx(mean).margin(3.0 * se));
  }
}

TEST_CASE("elbo_pair: single-state chains in closed form") {
  GaussianHmm unit;
  unit.prior = {1.0};
  unit.trans = {{1.0}};
  unit.states = {{{0, 0}, Mat2::identity()}};
  CHECK(elbo_pair(unit, unit, 3).e == Catch::Approx(-8.5136311992280369).epsilon(1e-12));

  Rng rng(7);
  for (int round = 0; round < 10; ++round) {
    const auto base = oracle::random_model(rng, 1);
    const auto reduced = oracle::random_model(rng, 1);
    const std::size_t tau = 1 + static_cast<std::size_t>(rng.uniform() * 12);
    const double per_step = expected_gauss_loglik(base.states[0], reduced.states[0]);
    CHECK(elbo_pair(base, reduced, tau).e ==
          Catch::Approx(static_cast<double>(tau) * per_step).epsilon(1e-12));
  }
}

TEST_CASE("elbo_pair: lower bound versus sampled expected log-likelihood") {
  Rng rng(58);
  for (int round = 0; round < 6; ++round) {
    const std::size_t kb = 1 + static_cast<std::size_t>(rng.uniform() * 2);
    const std::size_t kr = 1 + static_cast<std::size_t>(rng.uniform() * 2);
    const std::size_t tau = 1 + static_cast<std::size_t>(rng.uniform() * 3);
    const auto base = oracle::random_model(rng, kb);
    const auto reduced = oracle::random_model(rng, kr);
    const double bound = elbo_pair(base, reduced, tau).e;
    const auto mc = mc_expected_loglik(base, reduced, tau, 100000, 1000 + round);
    CHECK(bound <= mc.mean + 3.0 * mc.se);
  }
}

TEST_CASE("elbo_pair: phi tables are row-stochastic") {
  Rng rng(61);
  const auto base = oracle::random_model(rng, 3);
  const auto reduced = oracle::random_model(rng, 2);
  const auto ep = elbo_pair(base, reduced, 6);
  for (std::size_t b = 0; b < 3; ++b) {
    double s = 0.0;
    for (std::size_t r = 0; r < 2; ++r) s += ep.phi_first(b, r);
    CHECK(s == Catch::Approx(1.0).margin(1e-12));
  }
  for (std::size_t t = 2; t <= 6; ++t) {
    for (std::size_t b2 = 0; b2 < 3; ++b2) {
      for (std::size_t r = 0; r < 2; ++r) {
        double s = 0.0;
        for (std::size_t r2 = 0; r2 < 2; ++r2) s += ep.phi_step(t, b2, r, r2);
        CHECK(s == Catch::Approx(1.0).margin(1e-12));
      }
    }
  }
}

TEST_CASE("elbo_pair: exact-zero reduced probabilities stay finite") {
  // lie_familiar's stored prior has an exact zero entry
  const auto base = to_hmm(bundled_model("truth_familiar"));
  const auto reduced = to_hmm(bundled_model("lie_familiar"));
  CHECK(reduced.prior[1] == 0.0);
  const auto ep = elbo_pair(base, reduced, 7);
  CHECK(std::isfinite(ep.e));
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(ep.phi_first(b, 1) == 0.0);  // zero prior mass cannot be assigned at t=1
  }
}

TEST_CASE("reduce: self-reduction returns the base model") {
  const auto base = separated_model();
  VhemConfig cfg;
  cfg.n_reduced = 1;
  cfg.n_restarts = 1;
  cfg.seed = 4;
  const auto mix = reduce({base}, cfg);
  REQUIRE(mix.models.size() == 1);
  CHECK(max_param_diff(mix.models[0], base) < 1e-6);
  CHECK(mix.weights[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(mix.assignments[0][0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("reduce: many identical bases collapse to the shared model") {
  const auto base = separated_model();
  VhemConfig cfg;
  cfg.n_reduced = 1;
  cfg.n_restarts = 1;
  cfg.seed = 9;
  const auto mix = reduce(std::vector<GaussianHmm>(7, base), cfg);
  REQUIRE(mix.models.size() == 1);
  CHECK(max_param_diff(mix.models[0], base) < 1e-6);
}

TEST_CASE("reduce: ELBO trace is monotone within 1e-6") {
  Rng rng(73);
  std::vector<GaussianHmm> bases;
  for (int i = 0; i < 8; ++i) bases.push_back(oracle::random_model(rng, 3, 0.0, 600.0, 40.0));
  VhemConfig cfg;
  cfg.n_reduced = 3;
  cfg.n_restarts = 3;
  cfg.seed = 15;
  cfg.virtual_len = 10;
  const auto mix = reduce(bases, cfg);
  for (std::size_t i = 1; i < mix.trace.size(); ++i) {
    CHECK(mix.trace[i] >= mix.trace[i - 1] - 1e-6);
  }
}

TEST_CASE("reduce: clustering recovery on jittered archetypes") {
  const std::vector<std::string> names = {"truth_familiar", "truth_unfamiliar", "lie_familiar"};
  Rng rng(81);
  std::vector<GaussianHmm> bases;
  std::vector<std::size_t> truth;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto archetype = to_hmm(bundled_model(names[c]));
    for (int i = 0; i < 8; ++i) {
      bases.push_back(oracle::jitter_model(archetype, rng));
      truth.push_back(c);
    }
  }
  VhemConfig cfg;
  cfg.n_reduced = 3;
  cfg.n_restarts = 3;
  cfg.seed = 21;
  const auto mix = reduce(bases, cfg);
  const auto hard = hard_assignments(mix);
  CHECK(oracle::adjusted_rand_index(hard, truth) >= 0.9);

  // outputs stay valid
  double wsum = 0.0;
  for (double w : mix.weights) wsum += w;
  CHECK(wsum == Catch::Approx(1.0).margin(1e-10));
  for (const auto& m : mix.models) CHECK(validate_model(to_record(m)).empty());
  for (const auto& row : mix.assignments) {
    double s = 0.0;
    for (double v : row) s += v;
    CHECK(s == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("reduce: permuting base order permutes assignments identically") {
  Rng rng(91);
  std::vector<GaussianHmm> bases;
  for (int i = 0; i < 6; ++i) bases.push_back(oracle::random_model(rng, 2, 0.0, 600.0, 60.0));
  VhemConfig cfg;
  cfg.n_reduced = 2;
  cfg.n_restarts = 1;  // deterministic farthest-first seeding
  cfg.virtual_len = 8;
  cfg.seed = 5;
  const auto mix1 = reduce(bases, cfg);

  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  std::vector<GaussianHmm> shuffled;
  for (std::size_t i : perm) shuffled.push_back(bases[i]);
  const auto mix2 = reduce(shuffled, cfg);

  REQUIRE(mix1.assignments.size() == mix2.assignments.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = 0; j < cfg.n_reduced; ++j) {
      CHECK(mix2.assignments[i][j] == Catch::Approx(mix1.assignments[perm[i]][j]).margin(1e-6));
    }
  }
  for (std::size_t j = 0; j < cfg.n_reduced; ++j) {
    CHECK(max_param_diff(mix1.models[j], mix2.models[j]) < 1e-5);
  }
}

TEST_CASE("reduce: handles base models with different state counts") {
  Rng rng(131);
  std::vector<GaussianHmm> bases;
  for (int i = 0; i < 3; ++i) bases.push_back(oracle::random_model(rng, 2, 0.0, 300.0, 60.0));
  for (int i = 0; i < 3; ++i) bases.push_back(oracle::random_model(rng, 3, 300.0, 600.0, 60.0));
  VhemConfig cfg;
  cfg.n_reduced = 2;
  cfg.n_restarts = 2;
  cfg.virtual_len = 8;
  cfg.seed = 77;
  const auto mix = reduce(bases, cfg);
  REQUIRE(mix.models.size() == 2);
  for (const auto& m : mix.models) {
    CHECK((m.n_states() == 2 || m.n_states() == 3));
    CHECK(validate_model(to_record(m)).empty());
  }
  for (std::size_t i = 1; i < mix.trace.size(); ++i) {
    CHECK(mix.trace[i] >= mix.trace[i - 1] - 1e-6);
  }
}

TEST_CASE("hard_assignments: argmax with ties to the lower index") {
  HmmMixture mix;
  mix.assignments = {{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}};
  const auto hard = hard_assignments(mix);
  CHECK(hard == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("reduce: input validation") {
  const auto base = separated_model();
  VhemConfig cfg;
  cfg.n_reduced = 2;
  CHECK_THROWS(reduce({base}, cfg));  // K_r exceeds base count
  cfg.n_reduced = 0;
  CHECK_THROWS(reduce({base}, cfg));
  cfg.n_reduced = 1;
  CHECK_THROWS(reduce({}, cfg));
}
