#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "covop/covariance.hpp"
#include "covop/rng.hpp"
#include "covop/seeds.hpp"
#include "covop/symspace.hpp"

namespace covop {

// Power-law eigenvalue profile lambda_j = scale * j^{-2 beta}, j = 1..p.
// beta <= 1/2 is allowed so that negative-control experiments can be run;
// truncation_dimension refuses that regime instead.
struct SpectrumSpec {
  double beta = 1.0;
  int p = 1;
  double scale = 1.0;

  void validate() const {
    if (p < 1) throw ConfigError("spectrum: p must be a positive integer");
    if (!(beta > 0.0)) throw ConfigError("spectrum: beta must be positive");
    if (!(scale > 0.0)) throw ConfigError("spectrum: scale must be positive");
  }

  Eigen::VectorXd eigenvalues() const {
    validate();
    Eigen::VectorXd lambda(p);
    for (int j = 0; j < p; ++j)
      lambda[j] = scale * std::pow(static_cast<double>(j + 1), -2.0 * beta);
    return lambda;
  }
};

inline Eigen::VectorXd eigen_spectrum(const SpectrumSpec& spec) { return spec.eigenvalues(); }

// Smallest p whose discarded spectral tail sum_{j>p} j^{-2 beta} is at most
// tail_fraction of the full trace. Infinite sums are evaluated by partial
// summation plus an Euler-Maclaurin remainder, which is sandwiched by the
// integral estimate p^{1-2 beta} / (2 beta - 1).
inline int truncation_dimension(double beta, double tail_fraction) {
  if (!(beta > 0.5))
    throw ConfigError(
        "truncation_dimension: beta must exceed 1/2 (the trace diverges otherwise; "
        "set p manually for negative controls)");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw ConfigError("truncation_dimension: tail_fraction must lie in (0,1)");
  const double s = 2.0 * beta;
  const auto tail_after = [s](double n) {
    // sum_{j>n} j^{-s} via Euler-Maclaurin at j = n.
    return std::pow(n, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(n, -s) +
           (s / 12.0) * std::pow(n, -s - 1.0);
  };
  const int base = 4096;
  double head = 0.0;
  for (int j = 1; j <= base; ++j) head += std::pow(static_cast<double>(j), -s);
  const double total = head + tail_after(static_cast<double>(base));
  double partial = 0.0;
  for (int p = 1; p <= base; ++p) {
    partial += std::pow(static_cast<double>(p), -s);
    if (total - partial <= tail_fraction * total) return p;
  }
  throw NumericalError("truncation_dimension: tail fraction too small for the search range");
}

// Standardized score distribution (mean 0, variance 1 analytically).
class ScoreLaw {
 public:
  enum class Kind {
    gaussian,
    standardized_uniform,
    standardized_exponential,
    rademacher,
    standardized_student_t,
  };

  static ScoreLaw gaussian() { return ScoreLaw(Kind::gaussian); }
  static ScoreLaw standardized_uniform() { return ScoreLaw(Kind::standardized_uniform); }
  static ScoreLaw standardized_exponential() { return ScoreLaw(Kind::standardized_exponential); }
  static ScoreLaw rademacher() { return ScoreLaw(Kind::rademacher); }
  static ScoreLaw standardized_student_t(double df) {
    if (!(df > 2.0))
      throw ConfigError("score_law: student_t df must exceed 2 (standardization needs variance)");
    return ScoreLaw(Kind::standardized_student_t, df);
  }

  Kind kind() const { return kind_; }
  double df() const { return df_; }

  // Exact var(zeta^2). Diverges for student_t df <= 4.
  double var_of_square() const {
    switch (kind_) {
      case Kind::gaussian: return 2.0;
      case Kind::standardized_uniform: return 4.0 / 5.0;
      case Kind::standardized_exponential: return 8.0;
      case Kind::rademacher: return 0.0;
      case Kind::standardized_student_t:
        if (df_ <= 4.0) return std::numeric_limits<double>::infinity();
        return 2.0 * (df_ - 1.0) / (df_ - 4.0);
    }
    throw ConfigError("score_law: unknown kind");
  }

  // Deliberately breaks a model assumption: rademacher degenerates the
  // fourth-moment operator, heavy-tailed student_t breaks the moment growth.
  bool negative_control() const {
    if (kind_ == Kind::rademacher) return true;
    if (kind_ == Kind::standardized_student_t) return df_ <= 8.0;
    return false;
  }

  double sample(Rng& rng) const {
    switch (kind_) {
      case Kind::gaussian:
        return rng.normal();
      case Kind::standardized_uniform:
        return (2.0 * rng.uniform01() - 1.0) * std::sqrt(3.0);
      case Kind::standardized_exponential:
        return rng.exponential() - 1.0;
      case Kind::rademacher:
        return (rng.next_u64() >> 63) ? 1.0 : -1.0;
      case Kind::standardized_student_t: {
        const double z = rng.normal();
        const double chi = rng.chi_squared(df_);
        const double t = z / std::sqrt(chi / df_);
        return t / std::sqrt(df_ / (df_ - 2.0));
      }
    }
    throw ConfigError("score_law: unknown kind");
  }

  std::string name() const {
    switch (kind_) {
      case Kind::gaussian: return "gaussian";
      case Kind::standardized_uniform: return "standardized_uniform";
      case Kind::standardized_exponential: return "standardized_exponential";
      case Kind::rademacher: return "rademacher";
      case Kind::standardized_student_t: return "standardized_student_t";
    }
    return "unknown";
  }

  bool operator==(const ScoreLaw& o) const { return kind_ == o.kind_ && df_ == o.df_; }

 private:
  explicit ScoreLaw(Kind kind, double df = 0.0) : kind_(kind), df_(df) {}
  Kind kind_;
  double df_;
};

// Law of the squared radial factor eta^2 in the elliptical model Z = eta U.
// All three laws have mean p, so E(Z Z^T) = I holds without extra scaling.
class EtaLaw {
 public:
  enum class Kind { chi_squared_p, gamma_p_1, scaled_negative_binomial };

  static EtaLaw chi_squared_p() { return EtaLaw(Kind::chi_squared_p); }
  static EtaLaw gamma_p_1() { return EtaLaw(Kind::gamma_p_1); }
  static EtaLaw scaled_negative_binomial(double tau) {
    if (!(tau > 0.0 && tau < 1.0))
      throw ConfigError("eta_law: tau must lie in (0,1)");
    return EtaLaw(Kind::scaled_negative_binomial, tau);
  }

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }

  void check_support(int p) const {
    if (p < 1) throw ConfigError("eta_law: dimension p below the law's support");
  }

  double var_eta_sq(int p) const {
    check_support(p);
    switch (kind_) {
      case Kind::chi_squared_p: return 2.0 * p;
      case Kind::gamma_p_1: return static_cast<double>(p);
      case Kind::scaled_negative_binomial: return p * (1.0 - tau_);
    }
    throw ConfigError("eta_law: unknown kind");
  }

  // r_p = E ||Z||^4 / (p (p+2)) = (p^2 + var(eta^2)) / (p (p+2)).
  // chi_squared_p gives exactly 1 (the Gaussian case).
  double fourth_moment_ratio(int p) const {
    const double pd = static_cast<double>(p);
    return (pd * pd + var_eta_sq(p)) / (pd * (pd + 2.0));
  }

  double sample_eta_sq(Rng& rng, int p) const {
    check_support(p);
    switch (kind_) {
      case Kind::chi_squared_p:
        return rng.chi_squared(static_cast<double>(p));
      case Kind::gamma_p_1:
        return rng.gamma(static_cast<double>(p));
      case Kind::scaled_negative_binomial: {
        // tau times the number of Bernoulli(tau) trials to reach p successes.
        std::int64_t trials = 0;
        for (int j = 0; j < p; ++j) trials += rng.geometric_trials(tau_);
        return tau_ * static_cast<double>(trials);
      }
    }
    throw ConfigError("eta_law: unknown kind");
  }

  std::string name() const {
    switch (kind_) {
      case Kind::chi_squared_p: return "chi_squared_p";
      case Kind::gamma_p_1: return "gamma_p_1";
      case Kind::scaled_negative_binomial: return "scaled_negative_binomial";
    }
    return "unknown";
  }

  bool operator==(const EtaLaw& o) const { return kind_ == o.kind_ && tau_ == o.tau_; }

 private:
  explicit EtaLaw(Kind kind, double tau = 0.0) : kind_(kind), tau_(tau) {}
  Kind kind_;
  double tau_;
};

enum class Family { kl, elliptical, mp };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::kl: return "kl";
    case Family::elliptical: return "elliptical";
    case Family::mp: return "mp";
  }
  return "unknown";
}

// A data-generating law. All families share the same diagonal population
// covariance (coordinates are fixed to the eigenbasis, M = Sigma^{1/2}
// diagonal, which loses nothing for the orthogonally invariant statistics
// studied here).
struct ModelSpec {
  Family family = Family::kl;
  SpectrumSpec spectrum;
  ScoreLaw score = ScoreLaw::gaussian();
  EtaLaw eta = EtaLaw::chi_squared_p();

  static ModelSpec kl(SpectrumSpec s, ScoreLaw law) {
    ModelSpec m;
    m.family = Family::kl;
    m.spectrum = s;
    m.score = law;
    m.validate();
    return m;
  }
  static ModelSpec elliptical(SpectrumSpec s, EtaLaw law) {
    ModelSpec m;
    m.family = Family::elliptical;
    m.spectrum = s;
    m.eta = law;
    m.validate();
    return m;
  }
  static ModelSpec mp(SpectrumSpec s, ScoreLaw law) {
    ModelSpec m;
    m.family = Family::mp;
    m.spectrum = s;
    m.score = law;
    m.validate();
    return m;
  }

  void validate() const {
    spectrum.validate();
    if (family == Family::elliptical) eta.check_support(spectrum.p);
  }

  ModelSpec with_beta(double beta) const {
    ModelSpec m = *this;
    m.spectrum.beta = beta;
    m.validate();
    return m;
  }
};

inline SymMatrix population_covariance(const ModelSpec& model) {
  return SymMatrix::diagonal(model.spectrum.eigenvalues());
}

namespace detail {

// One observation of the standardized score vector zeta in R^d.
// kl and mp coincide in the eigenbasis (both are sqrt(lambda_j) times an
// i.i.d. standardized coordinate); elliptical takes the leading d
// coordinates of Z = eta U with U uniform on the sphere of R^p.
inline void fill_scores(const ModelSpec& model, Index d, Rng& rng, double* out,
                        Eigen::VectorXd& sphere_buf) {
  switch (model.family) {
    case Family::kl:
    case Family::mp:
      for (Index j = 0; j < d; ++j) out[j] = model.score.sample(rng);
      return;
    case Family::elliptical: {
      const Index p = model.spectrum.p;
      double norm_sq = 0.0;
      do {
        norm_sq = 0.0;
        for (Index j = 0; j < p; ++j) {
          sphere_buf[j] = rng.normal();
          norm_sq += sphere_buf[j] * sphere_buf[j];
        }
      } while (norm_sq == 0.0);
      const double eta = std::sqrt(model.eta.sample_eta_sq(rng, static_cast<int>(p)));
      const double scale = eta / std::sqrt(norm_sq);
      for (Index j = 0; j < d; ++j) out[j] = scale * sphere_buf[j];
      return;
    }
  }
  throw ConfigError("model: unknown family");
}

}  // namespace detail

// n observations of the leading d standardized scores, one row each.
inline Eigen::MatrixXd sample_scores(const ModelSpec& model, Index d, Index n,
                                     std::uint64_t seed) {
  model.validate();
  if (d < 1 || d > model.spectrum.p) throw ConfigError("sample_scores: d out of range");
  if (n < 1) throw ConfigError("sample_scores: n must be positive");
  Rng rng = Rng::derive(seed, {seeds::kScores});
  Eigen::MatrixXd scores(n, d);
  Eigen::VectorXd row(d);
  Eigen::VectorXd sphere_buf(model.spectrum.p);
  for (Index i = 0; i < n; ++i) {
    detail::fill_scores(model, d, rng, row.data(), sphere_buf);
    scores.row(i) = row;
  }
  return scores;
}

// n observations of X in eigen-coordinates, one per column (p x n). The
// column layout keeps each observation contiguous for the resampling loops.
// Draw order is fixed (observation-major), so the result is bit-identical
// for a given (model, n, seed) no matter how callers schedule work.
inline Eigen::MatrixXd sample_observations(const ModelSpec& model, Index n, std::uint64_t seed) {
  model.validate();
  if (n < 1) throw ConfigError("sample_observations: n must be positive");
  const Index p = model.spectrum.p;
  const Eigen::VectorXd root_lambda = model.spectrum.eigenvalues().cwiseSqrt();
  Rng rng = Rng::derive(seed, {seeds::kScores});
  Eigen::MatrixXd obs(p, n);
  Eigen::VectorXd sphere_buf(p);
  for (Index i = 0; i < n; ++i) {
    detail::fill_scores(model, p, rng, obs.col(i).data(), sphere_buf);
    obs.col(i).array() *= root_lambda.array();
  }
  return obs;
}

// n x p matrix of observations (rows) plus generation metadata.
struct Dataset {
  Eigen::MatrixXd values;  // n x p, rows are observations in eigen-coordinates
  ModelSpec model;
  std::uint64_t seed = 0;

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }
};

inline Dataset sample_dataset(const ModelSpec& model, Index n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("sample_dataset: n must be at least 2");
  Dataset ds;
  ds.values = sample_observations(model, n, seed).transpose();
  ds.model = model;
  ds.seed = seed;
  return ds;
}

inline double t_statistic(const Dataset& data, const SymMatrix& sigma) {
  return t_statistic_cols(data.values.transpose(), sigma);
}

inline double projected_t_statistic(const Dataset& data, const SymMatrix& sigma, Index k) {
  return projected_t_statistic_cols(data.values.transpose(), sigma, k);
}

// Analytic covariance operator of zeta zeta^T restricted to the leading d
// coordinates, per family.
inline SymOperatorRep score_moment_operator(const ModelSpec& model, Index d) {
  if (d < 1 || d > model.spectrum.p)
    throw ConfigError("score_moment_operator: d out of range");
  switch (model.family) {
    case Family::kl:
    case Family::mp:
      return fourth_moment_iid(d, model.score.var_of_square());
    case Family::elliptical:
      return fourth_moment_elliptical(d, model.eta.fourth_moment_ratio(model.spectrum.p));
  }
  throw ConfigError("model: unknown family");
}

}  // namespace covop
