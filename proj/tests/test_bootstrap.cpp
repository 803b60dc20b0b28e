#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "covop/bootstrap.hpp"
#include "covop/harness.hpp"
#include "test_support.hpp"

using namespace covop;

namespace {

Eigen::MatrixXd gaussian_obs(Index p, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd obs(p, n);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < n; ++j) obs(i, j) = rng.normal();
  return obs;
}

Eigen::VectorXd multinomial_weights(Index n, Rng& rng) {
  return draw_multipliers(MultiplierLaw::multinomial_minus_one, n, rng);
}

}  // namespace

TEST_CASE("identical rows give identically zero multinomial replicates") {
  Eigen::MatrixXd obs(3, 8);
  for (Index i = 0; i < 8; ++i) obs.col(i) << 2.0, -1.0, 0.5;
  const auto sample =
      bootstrap_norms(obs, MultiplierLaw::multinomial_minus_one, 300, 17);
  CHECK(sample.max() == 0.0);  // weights sum to zero against a constant outer product
}

TEST_CASE("two-point dataset: hand enumeration of the replicate values") {
  Eigen::MatrixXd obs(2, 2);
  obs << 1.0, 0.0, 0.0, 1.0;  // observations e1, e2

  // counts (2,0): weights (1,-1): (1/sqrt 2) ||x1 x1' - x2 x2'|| = 1/sqrt 2
  Eigen::VectorXd w(2);
  w << 1.0, -1.0;
  CHECK(bootstrap_replicate_norm(obs, w) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // the three count vectors give values {1/sqrt2, 1/sqrt2, 0} with probs {1/4,1/4,1/2}
  const auto sample = bootstrap_norms(obs, MultiplierLaw::multinomial_minus_one, 4000, 5);
  int zeros = 0;
  for (double v : sample.values()) {
    const bool known = std::abs(v) < 1e-14 || std::abs(v - 1.0 / std::sqrt(2.0)) < 1e-14;
    REQUIRE(known);
    if (std::abs(v) < 1e-14) ++zeros;
  }
  const double freq = static_cast<double>(zeros) / 4000.0;
  CHECK(std::abs(freq - 0.5) < 5.0 * std::sqrt(0.25 / 4000.0));
}

TEST_CASE("resampling a dataset reproduces the weighted-sum formula") {
  const Index p = 6;
  const Index n = 40;
  const auto obs = gaussian_obs(p, n, 2311);
  const Eigen::MatrixXd cov = sample_covariance_cols(obs).mat();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i)
      ++counts[static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(n)))];

    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) w[i] = counts[static_cast<std::size_t>(i)] - 1.0;
    const double via_weights = bootstrap_replicate_norm(obs, w);

    Eigen::MatrixXd resampled(p, n);
    Index col = 0;
    for (Index i = 0; i < n; ++i)
      for (int c = 0; c < counts[static_cast<std::size_t>(i)]; ++c)
        resampled.col(col++) = obs.col(i);
    REQUIRE(col == n);
    const double via_resample =
        std::sqrt(static_cast<double>(n)) *
        operator_norm_sym((sample_covariance_cols(resampled).mat() - cov).eval());
    CHECK(via_weights == doctest::Approx(via_resample).epsilon(1e-12));
  }
}

TEST_CASE("multinomial weights sum to zero exactly") {
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = multinomial_weights(137, rng);
    CHECK(w.sum() == 0.0);
  }
}

TEST_CASE("conditional mean of the weighted scatter vanishes for every law") {
  const Index p = 4;
  const Index n = 25;
  const auto obs = gaussian_obs(p, n, 404);
  for (const auto law : {MultiplierLaw::multinomial_minus_one, MultiplierLaw::gaussian,
                         MultiplierLaw::rademacher}) {
    const int reps = 6000;
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
    for (int b = 0; b < reps; ++b) {
      Rng rng = Rng::derive(7000, {static_cast<std::uint64_t>(law), static_cast<std::uint64_t>(b)});
      const auto w = draw_multipliers(law, n, rng);
      const Eigen::MatrixXd s = weighted_scatter_cols(obs, w);
      mean += s;
      second += s.cwiseAbs2();
    }
    mean /= reps;
    second /= reps;
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b) {
        const double se =
            std::sqrt(std::max(second(a, b) - mean(a, b) * mean(a, b), 0.0) / reps);
        INFO(multiplier_law_name(law));
        CHECK(std::abs(mean(a, b)) <= 5.0 * se + 1e-12);
      }
  }
}

TEST_CASE("row permutation leaves the replicate distribution unchanged") {
  const Index p = 5;
  const Index n = 60;
  const auto obs = gaussian_obs(p, n, 321);
  Eigen::MatrixXd permuted(p, n);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffler(1);
  for (Index i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(shuffler.uniform_below(static_cast<std::uint64_t>(i + 1)))]);
  for (Index i = 0; i < n; ++i) permuted.col(i) = obs.col(perm[static_cast<std::size_t>(i)]);

  const auto a = bootstrap_norms(obs, MultiplierLaw::multinomial_minus_one, 2000, 77);
  const auto b = bootstrap_norms(permuted, MultiplierLaw::multinomial_minus_one, 2000, 77);
  CHECK(kolmogorov_distance(a, b) < 0.07);  // two-sample noise floor at B=2000
}

TEST_CASE("scaling the data by c scales every replicate by c^2") {
  const Index p = 4;
  const Index n = 30;
  const auto obs = gaussian_obs(p, n, 888);
  const auto base = bootstrap_norms(obs, MultiplierLaw::gaussian, 200, 3);
  const auto doubled = bootstrap_norms((2.0 * obs).eval(), MultiplierLaw::gaussian, 200, 3);
  const auto scaled = bootstrap_norms((3.0 * obs).eval(), MultiplierLaw::gaussian, 200, 3);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(doubled.values()[i] == doctest::Approx(4.0 * base.values()[i]).epsilon(1e-12));
    CHECK(scaled.values()[i] == doctest::Approx(9.0 * base.values()[i]).epsilon(1e-10));
  }
}

TEST_CASE("projected replicates at k = p equal the full replicates bitwise") {
  const auto obs = gaussian_obs(5, 25, 654);
  const auto full = bootstrap_norms(obs, MultiplierLaw::multinomial_minus_one, 100, 9);
  const auto proj = bootstrap_norms(obs, MultiplierLaw::multinomial_minus_one, 100, 9, 5);
  CHECK(full.values() == proj.values());
  CHECK_THROWS_AS(bootstrap_norms(obs, MultiplierLaw::gaussian, 100, 9, 6), ConfigError);
  CHECK_THROWS_AS(bootstrap_norms(obs, MultiplierLaw::gaussian, 0, 9), ConfigError);
}

TEST_CASE("dual gram route agrees with the direct scatter route") {
  const Index p = 50;
  const Index n = 20;  // n < p is where the dual route engages
  const auto obs = gaussian_obs(p, n, 777);
  BootstrapOptions dual;
  dual.use_dual = true;
  for (const auto law : {MultiplierLaw::multinomial_minus_one, MultiplierLaw::gaussian}) {
    const auto direct = bootstrap_norms(obs, law, 150, 31);
    const auto via_dual = bootstrap_norms(obs, law, 150, 31, std::nullopt, dual);
    for (std::size_t i = 0; i < direct.size(); ++i)
      CHECK(direct.values()[i] == doctest::Approx(via_dual.values()[i]).epsilon(1e-10));
  }
}

TEST_CASE("threading does not change the replicate sample") {
  const auto obs = gaussian_obs(6, 50, 1212);
  BootstrapOptions four;
  four.threads = 4;
  const auto serial = bootstrap_norms(obs, MultiplierLaw::rademacher, 400, 21);
  const auto threaded = bootstrap_norms(obs, MultiplierLaw::rademacher, 400, 21, std::nullopt, four);
  CHECK(serial.values() == threaded.values());
}

TEST_CASE("bootstrap laws track the reference distribution as n grows") {
  // qualitative: median d_K to the reference shrinks from n=100 to n=800
  // for every multiplier law
  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 30, 1.0}, ScoreLaw::gaussian());
  for (const auto law : {MultiplierLaw::multinomial_minus_one, MultiplierLaw::gaussian,
                         MultiplierLaw::rademacher}) {
    double dk_small = 0.0;
    double dk_large = 0.0;
    for (long n : {100L, 800L}) {
      const auto reference = reference_distribution(model, n, 1500, 42);
      std::vector<double> dks;
      for (int r = 0; r < 7; ++r) {
        const auto obs =
            sample_observations(model, n, Rng::derive_seed(4242, {static_cast<std::uint64_t>(law), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)}));
        const auto boot = bootstrap_norms(obs, law, 600, 1000 + static_cast<std::uint64_t>(r));
        dks.push_back(kolmogorov_distance(boot, reference));
      }
      const double median = ScalarSample(dks).quantile(0.5);
      (n == 100 ? dk_small : dk_large) = median;
    }
    INFO(multiplier_law_name(law));
    CHECK(dk_large < dk_small);
  }
}
