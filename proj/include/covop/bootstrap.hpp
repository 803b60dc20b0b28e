#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covop/covariance.hpp"
#include "covop/metrics.hpp"
#include "covop/models.hpp"
#include "covop/rng.hpp"
#include "covop/seeds.hpp"
#include "covop/symspace.hpp"
#include "covop/thread_pool.hpp"

namespace covop {

enum class MultiplierLaw { multinomial_minus_one, gaussian, rademacher };

inline std::string multiplier_law_name(MultiplierLaw law) {
  switch (law) {
    case MultiplierLaw::multinomial_minus_one: return "multinomial_minus_one";
    case MultiplierLaw::gaussian: return "gaussian";
    case MultiplierLaw::rademacher: return "rademacher";
  }
  return "unknown";
}

// One replicate's multiplier vector. The multinomial case literally draws n
// indices with replacement and uses (count - 1), so it matches the
// resample-and-recompute definition of the empirical bootstrap bit for bit;
// the weights sum to zero exactly per replicate.
inline Eigen::VectorXd draw_multipliers(MultiplierLaw law, Index n, Rng& rng) {
  Eigen::VectorXd w(n);
  switch (law) {
    case MultiplierLaw::multinomial_minus_one: {
      std::vector<std::int32_t> counts(static_cast<std::size_t>(n), 0);
      for (Index i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(n)))];
      for (Index i = 0; i < n; ++i)
        w[i] = static_cast<double>(counts[static_cast<std::size_t>(i)]) - 1.0;
      return w;
    }
    case MultiplierLaw::gaussian:
      for (Index i = 0; i < n; ++i) w[i] = rng.normal();
      return w;
    case MultiplierLaw::rademacher:
      for (Index i = 0; i < n; ++i) w[i] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
      return w;
  }
  throw ConfigError("multiplier law: unknown kind");
}

// sqrt(n) || (1/n) sum_i w_i (x_i x_i^T - S) ||_op for one weight vector,
// observations as columns, S the sample covariance. Centering the summands
// is the same as centering the weights (sum_i w_i (x_i x_i^T - S) =
// sum_i (w_i - mean w) x_i x_i^T), so multinomial-minus-one weights, which
// sum to zero, are untouched; for i.i.d. multipliers the centering is what
// makes the conditional covariance match that of sqrt(n)(S - Sigma).
inline double bootstrap_replicate_norm(const Eigen::MatrixXd& obs_cols,
                                       const Eigen::VectorXd& w,
                                       std::optional<Index> k = std::nullopt) {
  const Index p = obs_cols.rows();
  const Index n = obs_cols.cols();
  if (w.size() != n) throw ConfigError("bootstrap: weight length mismatch");
  const Index dim = k.value_or(p);
  if (dim < 1 || dim > p) throw ConfigError("bootstrap: k out of range");
  const auto data = obs_cols.topRows(dim);
  const Eigen::VectorXd centered = w.array() - w.mean();
  return std::sqrt(static_cast<double>(n)) *
         operator_norm_sym(weighted_scatter_cols(data, centered));
}

struct BootstrapOptions {
  int threads = 1;
  // Dual route: the nonzero spectrum of the weighted scatter equals that of
  // G^{1/2} diag(w) G^{1/2} with G the n x n Gram matrix. Pays off when
  // n << dim; only engaged in that regime. Off by default.
  bool use_dual = false;
};

// Bootstrap sample of sqrt(n) || S* - S ||_op (full or k-projected statistic),
// `replicates` values, sorted. Replicate b draws from the stream
// (seed, 'weight', b), so the result is independent of the thread schedule.
//
// The multinomial law is computed literally as sampling with replacement:
// the replicate's covariance accumulates the n drawn columns, and S is
// subtracted. Degenerate datasets of identical rows therefore give exactly
// zero. The i.i.d. multiplier laws use centered weights (see
// bootstrap_replicate_norm above).
inline ScalarSample bootstrap_norms(const Eigen::MatrixXd& obs_cols, MultiplierLaw law,
                                    Index replicates, std::uint64_t seed,
                                    std::optional<Index> k = std::nullopt,
                                    BootstrapOptions options = {}) {
  const Index p = obs_cols.rows();
  const Index n = obs_cols.cols();
  if (replicates < 1) throw ConfigError("bootstrap_norms: replicates must be positive");
  const Index dim = k.value_or(p);
  if (dim < 1 || dim > p) throw ConfigError("bootstrap_norms: k out of range");
  const Eigen::MatrixXd data = obs_cols.topRows(dim);
  const Eigen::MatrixXd cov = sample_covariance_cols(data).mat();

  std::optional<Eigen::MatrixXd> gram_half;
  if (options.use_dual && n < dim) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(data.transpose());
    gram_half = psd_sqrt(Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>()));
  }
  const double root_n = std::sqrt(static_cast<double>(n));

  std::vector<double> values(static_cast<std::size_t>(replicates));
  parallel_for(replicates, options.threads, [&](std::int64_t b) {
    Rng rng = Rng::derive(seed, {seeds::kWeights, static_cast<std::uint64_t>(b)});
    double value = 0.0;
    if (law == MultiplierLaw::multinomial_minus_one) {
      Eigen::VectorXd w = Eigen::VectorXd::Constant(n, -1.0);
      Eigen::MatrixXd resampled(dim, n);
      for (Index i = 0; i < n; ++i) {
        const Index pick =
            static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
        resampled.col(i) = data.col(pick);
        w[pick] += 1.0;
      }
      if (gram_half) {
        const Eigen::MatrixXd h = (*gram_half) * w.asDiagonal() * (*gram_half);
        value = operator_norm_sym(h) / root_n;
      } else {
        const Eigen::MatrixXd boot_cov = sample_covariance_cols(resampled).mat();
        value = root_n * operator_norm_sym((boot_cov - cov).eval());
      }
    } else {
      Eigen::VectorXd w = draw_multipliers(law, n, rng);
      w.array() -= w.mean();
      if (gram_half) {
        const Eigen::MatrixXd h = (*gram_half) * w.asDiagonal() * (*gram_half);
        value = operator_norm_sym(h) / root_n;
      } else {
        value = root_n * operator_norm_sym(weighted_scatter_cols(data, w));
      }
    }
    values[static_cast<std::size_t>(b)] = value;
  });
  return ScalarSample(std::move(values));
}

inline ScalarSample bootstrap_norms(const Dataset& data, MultiplierLaw law, Index replicates,
                                    std::uint64_t seed, std::optional<Index> k = std::nullopt,
                                    BootstrapOptions options = {}) {
  return bootstrap_norms(Eigen::MatrixXd(data.values.transpose()), law, replicates, seed, k,
                         options);
}

}  // namespace covop
