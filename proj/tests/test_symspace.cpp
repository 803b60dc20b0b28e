#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "covop/models.hpp"
#include "covop/serialize.hpp"
#include "covop/symspace.hpp"
#include "test_support.hpp"

using namespace covop;
using covop::testing::ks_against_cdf;
using covop::testing::random_symmetric;

TEST_CASE("sym_vec on pinned matrices, diagonal-first ordering") {
  const auto v = sym_vec(Eigen::MatrixXd::Identity(2, 2));
  CHECK(v.size() == 3);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 0.0);

  Eigen::MatrixXd swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  const auto w = sym_vec(swap);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == std::sqrt(2.0));
  CHECK(w.squaredNorm() == doctest::Approx(swap.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("sym_vec round trip: diagonals bitwise, off-diagonals to one ulp") {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.uniform_below(8));
    const Eigen::MatrixXd a = random_symmetric(d, rng);
    const Eigen::MatrixXd back = sym_unvec(sym_vec(a));
    for (Index i = 0; i < d; ++i) CHECK(back(i, i) == a(i, i));
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j) {
        const double x = a(i, j);
        const bool exact_or_ulp = back(i, j) == x ||
                                  back(i, j) == std::nextafter(x, 1e300) ||
                                  back(i, j) == std::nextafter(x, -1e300);
        CHECK(exact_or_ulp);
      }
  }
  CHECK_THROWS_AS(sym_unvec(Eigen::VectorXd::Zero(5)), ConfigError);
}

TEST_CASE("psi is an isometry for the trace inner product") {
  Rng rng(22);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Index d = 2 + static_cast<Index>(rng.uniform_below(11));
    const Eigen::MatrixXd a = random_symmetric(d, rng);
    const Eigen::MatrixXd b = random_symmetric(d, rng);
    double tr = 0.0;  // brute-force double loop for tr(AB)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) tr += a(i, j) * b(j, i);
    const double dot = sym_vec(a).dot(sym_vec(b));
    worst = std::max(worst, std::abs(dot - tr) / (a.norm() * b.norm()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("conjugation representation on pinned and random inputs") {
  CHECK(sym_conjugation(Eigen::MatrixXd::Identity(3, 3)) ==
        Eigen::MatrixXd::Identity(6, 6));

  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.0, 0.0, 3.0;
  Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(2, 2);
  e11(0, 0) = 1.0;
  const Eigen::VectorXd image = sym_conjugation(s) * sym_vec(e11);
  const Eigen::MatrixXd out = sym_unvec(image);
  CHECK(out(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(out(0, 1) == 0.0);
  CHECK(out(1, 1) == 0.0);

  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Index d = 5;
    const Eigen::MatrixXd sm = random_symmetric(d, rng);
    const Eigen::MatrixXd a = random_symmetric(d, rng);
    const Eigen::VectorXd via_rep = sym_conjugation(sm) * sym_vec(a);
    const Eigen::VectorXd direct = sym_vec((sm * a * sm).eval());
    CHECK((via_rep - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
  // self-adjoint: the rep matrix is symmetric
  const Eigen::MatrixXd r = sym_conjugation(random_symmetric(4, rng));
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("iid fourth-moment operator spectra") {
  const auto gaussian = fourth_moment_iid(3, 2.0);
  CHECK(gaussian.rep == Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(6, 6)));
  CHECK(gaussian.eigenvalues().minCoeff() == doctest::Approx(2.0));
  CHECK(gaussian.eigenvalues().maxCoeff() == doctest::Approx(2.0));

  const auto rad = fourth_moment_iid(2, 0.0);
  CHECK(rad.eigenvalues().minCoeff() == doctest::Approx(0.0));  // degenerate direction

  const auto expo = fourth_moment_iid(4, 8.0);
  const auto ev = expo.eigenvalues();
  CHECK(ev.size() == 10);
  for (int i = 0; i < 6; ++i) CHECK(ev[i] == doctest::Approx(2.0).epsilon(1e-12));
  for (int i = 6; i < 10; ++i) CHECK(ev[i] == doctest::Approx(8.0).epsilon(1e-12));

  for (Index d : {2, 3, 5, 8})
    for (double v : {0.0, 0.5, 2.0, 8.0})
      CHECK(fourth_moment_iid(d, v).eigenvalues().minCoeff() ==
            doctest::Approx(std::min(2.0, v)).epsilon(1e-12));
}

TEST_CASE("var of squared standardized exponential is 8 (monte carlo)") {
  Rng rng(24);
  const long n = 1000000;
  double mean = 0.0;
  std::vector<double> sq(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double z = rng.exponential() - 1.0;
    sq[static_cast<std::size_t>(i)] = z * z;
    mean += z * z;
  }
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double s : sq) {
    m2 += (s - mean) * (s - mean);
    m4 += std::pow(s - mean, 4);
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  const double se = std::sqrt((m4 - m2 * m2) / static_cast<double>(n));
  CHECK(std::abs(m2 - 8.0) <= 5.0 * se);
}

TEST_CASE("elliptical fourth-moment operator spectra") {
  const auto unit = fourth_moment_elliptical(4, 1.0);
  CHECK((unit.rep - 2.0 * Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() == 0.0);

  CHECK(fourth_moment_elliptical(5, 1.2).eigenvalues().maxCoeff() ==
        doctest::Approx(3.4).epsilon(1e-12));
  CHECK(fourth_moment_elliptical(4, 0.9).eigenvalues().minCoeff() ==
        doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("scale-mixture fourth-moment operator spectra") {
  const auto zero = fourth_moment_scale_mixture(3, 0.0);
  CHECK((zero.rep - 2.0 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fourth_moment_scale_mixture(3, 1.0).eigenvalues().maxCoeff() ==
        doctest::Approx(7.0).epsilon(1e-12));
  // top eigenvalue grows linearly in d: the assumption fails for non-constant eta
  double prev = 0.0;
  for (Index d : {2, 4, 8, 16}) {
    const double top = fourth_moment_scale_mixture(d, 1.5).eigenvalues().maxCoeff();
    CHECK(top == doctest::Approx((d + 2.0) * 1.5 + 2.0).epsilon(1e-12));
    CHECK(top > prev);
    prev = top;
  }
}

TEST_CASE("empirical fourth moment: scalar case by hand") {
  Eigen::MatrixXd scores(2, 1);
  scores << 0.0, std::sqrt(2.0);
  const auto op = empirical_fourth_moment(scores, Centering::sample_mean);
  // z^2 takes values {0, 2}: sample variance about its mean is 1
  CHECK(op.rep(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_fourth_moment(Eigen::MatrixXd::Zero(1, 2)), ConfigError);
}

TEST_CASE("empirical fourth moment converges to the analytic operator") {
  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 3, 1.0}, ScoreLaw::gaussian());
  const auto scores = sample_scores(model, 3, 100000, 2024);
  const auto emp = empirical_fourth_moment(scores, Centering::sample_mean);
  const auto ana = fourth_moment_iid(3, 2.0);
  CHECK(operator_norm_sym((emp.rep - ana.rep).eval()) < 0.15);
}

TEST_CASE("covariance operator: identity sigma and scalar case") {
  const auto j_op = fourth_moment_iid(3, 2.0);
  const auto c = covariance_operator(SymMatrix::identity(3), j_op);
  CHECK((c.rep - j_op.rep).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd lambda(1, 1);
  lambda << 0.7;
  const auto c1 = covariance_operator(SymMatrix(lambda), fourth_moment_iid(1, 8.0));
  CHECK(c1.rep(0, 0) == doctest::Approx(0.7 * 0.7 * 8.0).epsilon(1e-12));

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(covariance_operator(SymMatrix(indef), fourth_moment_iid(2, 2.0)),
                  NumericalError);
}

TEST_CASE("covariance operator is positive definite when sigma and the score op are") {
  Rng rng(35);
  for (int rep = 0; rep < 30; ++rep) {
    const Index d = 2 + static_cast<Index>(rng.uniform_below(5));
    Eigen::VectorXd lambda(d);
    for (Index j = 0; j < d; ++j) lambda[j] = 0.05 + rng.uniform01();
    const double v = 0.1 + 4.0 * rng.uniform01();
    const auto c = covariance_operator(SymMatrix::diagonal(lambda), fourth_moment_iid(d, v));
    CHECK(c.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("covariance operator matches the monte carlo covariance of psi(YY^T)") {
  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 3, 1.0}, ScoreLaw::gaussian());
  const auto sigma = population_covariance(model);
  const auto c_op = covariance_operator(sigma, score_moment_operator(model, 3));
  const long n = 200000;
  const auto obs = sample_observations(model, n, 555);
  const Index q = sym_vec_size(3);

  Eigen::MatrixXd vecs(q, n);
  for (long i = 0; i < n; ++i)
    vecs.col(i) = sym_vec((obs.col(i) * obs.col(i).transpose()).eval());
  const Eigen::VectorXd mean = vecs.rowwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(q, q);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(q, q);  // E[(v v^T)_{ab}^2] for SE bands
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd c = vecs.col(i) - mean;
    cov += c * c.transpose();
    second += (c * c.transpose()).cwiseAbs2();
  }
  cov /= static_cast<double>(n);
  second /= static_cast<double>(n);
  for (Index a = 0; a < q; ++a)
    for (Index b = 0; b < q; ++b) {
      const double se =
          std::sqrt(std::max(second(a, b) - cov(a, b) * cov(a, b), 0.0) / static_cast<double>(n));
      CHECK(std::abs(cov(a, b) - c_op.rep(a, b)) <= 4.0 * se + 1e-9);
    }
}

TEST_CASE("empirical covariance operator: degenerate data and the conjugation identity") {
  Eigen::MatrixXd obs(3, 5);
  for (int i = 0; i < 5; ++i) obs.col(i) << 1.0, 2.0, -1.0;  // identical observations
  const auto zero_op = empirical_covariance_operator(obs, 3);
  CHECK(zero_op.rep.cwiseAbs().maxCoeff() == 0.0);

  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 6, 1.0}, ScoreLaw::standardized_uniform());
  const auto data = sample_observations(model, 500, 808);
  const int k = 4;
  const auto c_hat = empirical_covariance_operator(data, k);

  // Chat = R Jhat R with Jhat from the population-whitened scores
  const Eigen::VectorXd lambda = model.spectrum.eigenvalues().head(k);
  Eigen::MatrixXd scores = data.topRows(k).transpose();
  for (int j = 0; j < k; ++j) scores.col(j) /= std::sqrt(lambda[j]);
  const auto j_hat = empirical_fourth_moment(scores, Centering::sample_mean);
  const Eigen::MatrixXd r = sym_conjugation(Eigen::MatrixXd(lambda.cwiseSqrt().asDiagonal()));
  CHECK(((r * j_hat.rep * r) - c_hat.rep).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("empirical covariance operator converges to the analytic one") {
  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 3, 1.0}, ScoreLaw::gaussian());
  const auto obs = sample_observations(model, 200000, 606);
  const auto c_hat = empirical_covariance_operator(obs, 3);
  const auto c_op =
      covariance_operator(population_covariance(model), score_moment_operator(model, 3));
  CHECK(operator_norm_sym((c_hat.rep - c_op.rep).eval()) < 0.1);
}

TEST_CASE("gaussian norm sample: degenerate, scalar law, second moment") {
  const SymOperatorRep zero(2, Eigen::MatrixXd::Zero(3, 3));
  const auto zeros = gaussian_norm_sample(zero, 100, 1);
  CHECK(zeros.max() == 0.0);

  // d=1: |N(0, sigma^2)| has cdf erf(t / (sigma sqrt(2)))
  const double sigma2 = 2.25;
  Eigen::MatrixXd c(1, 1);
  c << sigma2;
  const auto sample = gaussian_norm_sample(SymOperatorRep(1, c), 100000, 99);
  const double ks = ks_against_cdf(sample, [&](double t) {
    return std::erf(t / std::sqrt(2.0 * sigma2));
  });
  CHECK(ks < 1.9495 / std::sqrt(100000.0));  // KS critical value at level 1e-3

  // E ||G||_F^2 = trace of the covariance operator
  Rng rng(31);
  const Eigen::MatrixXd spd = testing::random_spd(6, rng);
  const SymOperatorRep op(2, spd.topLeftCorner(3, 3).eval());
  double mean_f2 = 0.0;
  double m2 = 0.0;
  {
    auto f = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.rep);
    const Eigen::MatrixXd factor =
        f.eigenvectors() * f.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Rng g(1234);
    const int m = 60000;
    std::vector<double> f2(m);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd z(3);
      for (int jj = 0; jj < 3; ++jj) z[jj] = g.normal();
      f2[i] = (factor * z).squaredNorm();
      mean_f2 += f2[i];
    }
    mean_f2 /= m;
    for (int i = 0; i < m; ++i) m2 += (f2[i] - mean_f2) * (f2[i] - mean_f2);
    m2 /= m;
    CHECK(std::abs(mean_f2 - op.rep.trace()) <= 5.0 * std::sqrt(m2 / m));
  }

  Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(3, 3);
  indef(2, 2) = -0.5;
  CHECK_THROWS_AS(gaussian_norm_sample(SymOperatorRep(2, indef), 10, 1), NumericalError);
}

TEST_CASE("gaussian kl divergence: pinned values and invariance") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  Eigen::MatrixXd two(1, 1);
  two << 2.0;
  const auto same = gaussian_kl(SymOperatorRep(1, one), SymOperatorRep(1, one));
  CHECK(same.divergence == 0.0);
  CHECK(same.pinsker_bound == 0.0);

  const auto kl = gaussian_kl(SymOperatorRep(1, one), SymOperatorRep(1, two));
  CHECK(kl.divergence == doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-12));
  CHECK(kl.divergence == doctest::Approx(0.15342640972).epsilon(1e-9));
  CHECK(kl.pinsker_bound == doctest::Approx(std::sqrt(kl.divergence / 2.0)));

  Rng rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 3;
    const Index q = sym_vec_size(d);
    const SymOperatorRep a(d, testing::random_spd(q, rng));
    const SymOperatorRep b(d, testing::random_spd(q, rng));
    Eigen::MatrixXd s = testing::random_spd(d, rng, 1.5);
    const Eigen::MatrixXd r = sym_conjugation(s);
    const SymOperatorRep a2(d, Eigen::MatrixXd(r * a.rep * r));
    const SymOperatorRep b2(d, Eigen::MatrixXd(r * b.rep * r));
    const double kl1 = gaussian_kl(a, b).divergence;
    const double kl2 = gaussian_kl(a2, b2).divergence;
    CHECK(kl1 == doctest::Approx(kl2).epsilon(1e-8));
  }
}

TEST_CASE("isotropize: trivial whitener and monte carlo isotropy") {
  Rng rng(33);
  // C = I: outputs are psi of the centered samples
  std::vector<SymMatrix> samples;
  for (int i = 0; i < 6; ++i) samples.emplace_back(random_symmetric(2, rng));
  const SymOperatorRep eye(2, Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd out = isotropize(eye, samples);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& s : samples) mean += s.mat();
  mean /= 6.0;
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd expect = sym_vec((samples[static_cast<std::size_t>(i)].mat() - mean).eval());
    CHECK((out.row(i).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  // whitened rank-one draws from the gaussian model have identity covariance
  const auto model = ModelSpec::kl(SpectrumSpec{1.0, 3, 1.0}, ScoreLaw::gaussian());
  const auto obs = sample_observations(model, 100000, 44);
  const auto c_op =
      covariance_operator(population_covariance(model), score_moment_operator(model, 3));
  std::vector<SymMatrix> outers;
  outers.reserve(100000);
  for (long i = 0; i < obs.cols(); ++i)
    outers.emplace_back((obs.col(i) * obs.col(i).transpose()).eval());
  const Eigen::MatrixXd m = isotropize(c_op, outers);
  const Eigen::MatrixXd cov =
      (m.transpose() * m) / static_cast<double>(m.rows());
  CHECK((cov - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 0.12);

  const SymOperatorRep singular(2, Eigen::MatrixXd::Zero(3, 3));
  CHECK_THROWS_AS(isotropize(singular, samples), NumericalError);
}

TEST_CASE("stable and effective rank") {
  CHECK(stable_rank(SymMatrix::identity(5)) == doctest::Approx(5.0));
  CHECK(effective_rank(SymMatrix::identity(5)) == doctest::Approx(5.0));

  Eigen::VectorXd u(3);
  u << 1.0, -2.0, 0.5;
  const SymMatrix rank_one((u * u.transpose()).eval());
  CHECK(stable_rank(rank_one) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(effective_rank(rank_one) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd lambda(3);
  lambda << 1.0, 0.25, 1.0 / 9.0;
  CHECK(effective_rank(SymMatrix::diagonal(lambda)) ==
        doctest::Approx(1.0 + 0.25 + 1.0 / 9.0).epsilon(1e-12));

  CHECK_THROWS_AS(stable_rank(SymMatrix(Eigen::MatrixXd::Zero(2, 2))), ConfigError);
  CHECK_THROWS_AS(effective_rank(SymMatrix(Eigen::MatrixXd::Zero(2, 2))), ConfigError);
}

TEST_CASE("sym operator rep serialization round trip") {
  Rng rng(34);
  const SymOperatorRep op(3, testing::random_spd(6, rng));
  const auto j = to_json(op);
  CHECK(j.at("ordering") == "diag-first");
  CHECK(j.at("q") == 6);
  const auto back = sym_operator_from_json(j);
  CHECK(back.d == op.d);
  CHECK(back.rep == op.rep);

  auto bad = j;
  bad["q"] = 7;
  CHECK_THROWS_AS(sym_operator_from_json(bad), ConfigError);
}
