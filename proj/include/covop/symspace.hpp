#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "covop/covariance.hpp"
#include "covop/metrics.hpp"
#include "covop/rng.hpp"
#include "covop/seeds.hpp"

namespace covop {

// Half-vectorization isometry psi between d x d symmetric matrices and
// vectors of length q = d(d+1)/2, with off-diagonals scaled by sqrt(2) so
// that <psi(A), psi(B)> = tr(AB).
//
// Coordinate ordering: the d diagonal slots first, then off-diagonals (i<j)
// in row-major order. The diagonal-first layout keeps the excess-kurtosis
// correction of the i.i.d.-score operator a leading diagonal block.

inline Index sym_vec_size(Index d) { return d * (d + 1) / 2; }

inline Index sym_dim_from_size(Index q) {
  const Index d = static_cast<Index>((std::sqrt(8.0 * static_cast<double>(q) + 1.0) - 1.0) / 2.0 + 0.5);
  if (d < 1 || sym_vec_size(d) != q)
    throw ConfigError("sym_unvec: length is not of the form d(d+1)/2");
  return d;
}

// Slot of the (i,j), i<j, off-diagonal pair.
inline Index sym_offdiag_index(Index d, Index i, Index j) {
  return d + i * (2 * d - i - 1) / 2 + (j - i - 1);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sym_vec(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw ConfigError("sym_vec: matrix must be square");
  const Index d = a.rows();
  const Scalar root2 = std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(sym_vec_size(d));
  for (Index j = 0; j < d; ++j) v[j] = a(j, j);
  Index s = d;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) v[s++] = root2 * a(i, j);
  return v;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sym_vec(const SymMatrixT<Scalar>& a) {
  return sym_vec(a.mat());
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sym_unvec(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Index d = sym_dim_from_size(v.size());
  const Scalar inv_root2 = Scalar(1) / std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a(d, d);
  for (Index j = 0; j < d; ++j) a(j, j) = v[j];
  Index s = d;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      a(i, j) = a(j, i) = v[s++] * inv_root2;
    }
  return a;
}

// q x q matrix R with R psi(A) = psi(S A S) for all symmetric A.
// Entry formulas follow from expanding (S A S)_ij on the psi basis.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sym_conjugation(
    const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  if (s.rows() != s.cols()) throw ConfigError("sym_conjugation: matrix must be square");
  const Index d = s.rows();
  const Index q = sym_vec_size(d);
  const Scalar root2 = std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r(q, q);
  for (Index k = 0; k < d; ++k) {
    for (Index i = 0; i < d; ++i) r(i, k) = s(i, k) * s(i, k);
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j)
        r(sym_offdiag_index(d, i, j), k) = root2 * s(i, k) * s(j, k);
  }
  for (Index k = 0; k < d; ++k)
    for (Index l = k + 1; l < d; ++l) {
      const Index c = sym_offdiag_index(d, k, l);
      for (Index i = 0; i < d; ++i) r(i, c) = root2 * s(i, k) * s(i, l);
      for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j)
          r(sym_offdiag_index(d, i, j), c) = s(i, k) * s(j, l) + s(i, l) * s(j, k);
    }
  return r;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sym_conjugation(
    const SymMatrixT<Scalar>& s) {
  return sym_conjugation(s.mat());
}

// A self-adjoint linear operator on symmetric-matrix space, stored as its
// q x q matrix in psi coordinates.
struct SymOperatorRep {
  Index d = 0;
  Eigen::MatrixXd rep;

  SymOperatorRep() = default;
  SymOperatorRep(Index dim, Eigen::MatrixXd matrix) : d(dim), rep(std::move(matrix)) {
    if (rep.rows() != rep.cols() || rep.rows() != sym_vec_size(d))
      throw ConfigError("SymOperatorRep: matrix size does not match dimension");
  }

  Index q() const { return rep.rows(); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalError("SymOperatorRep: eigensolver failed");
    return es.eigenvalues();
  }

  // Action on a symmetric matrix through the psi coordinates.
  SymMatrix apply(const SymMatrix& a) const {
    if (a.dim() != d) throw ConfigError("SymOperatorRep: dimension mismatch");
    return SymMatrix(sym_unvec((rep * sym_vec(a.mat())).eval()));
  }

  // <A, K(B)> computed through the representation; equals tr(A K(B)).
  double pairing(const SymMatrix& a, const SymMatrix& b) const {
    return sym_vec(a.mat()).dot(rep * sym_vec(b.mat()));
  }
};

// Covariance operator of zeta zeta^T for i.i.d. standardized scores with
// var(zeta^2) = var_square: 2 I plus the (var_square - 2) diagonal-slot
// correction. Spectrum {2 (x q-d), var_square (x d)}.
inline SymOperatorRep fourth_moment_iid(Index d, double var_square) {
  if (d < 1) throw ConfigError("fourth_moment_iid: dimension must be positive");
  if (var_square < 0.0) throw ConfigError("fourth_moment_iid: var_square must be >= 0");
  const Index q = sym_vec_size(d);
  Eigen::MatrixXd rep = 2.0 * Eigen::MatrixXd::Identity(q, q);
  for (Index j = 0; j < d; ++j) rep(j, j) = var_square;
  return SymOperatorRep(d, std::move(rep));
}

// Covariance operator of zeta zeta^T in an orthogonally invariant model with
// fourth-moment ratio r_p: 2 r_p I + (r_p - 1) psi(I) psi(I)^T.
// Spectrum {2 r_p (x q-1), (r_p - 1) d + 2 r_p (x 1)}.
inline SymOperatorRep fourth_moment_elliptical(Index d, double ratio) {
  if (d < 1) throw ConfigError("fourth_moment_elliptical: dimension must be positive");
  if (!(ratio > 0.0)) throw ConfigError("fourth_moment_elliptical: ratio must be positive");
  const Index q = sym_vec_size(d);
  Eigen::VectorXd psi_id = Eigen::VectorXd::Zero(q);
  psi_id.head(d).setOnes();
  Eigen::MatrixXd rep = 2.0 * ratio * Eigen::MatrixXd::Identity(q, q);
  rep.noalias() += (ratio - 1.0) * psi_id * psi_id.transpose();
  return SymOperatorRep(d, std::move(rep));
}

// Covariance operator of (eta W)(eta W)^T for a Gaussian scale mixture:
// 2 (v + 1) I + v psi(I) psi(I)^T with v = var(eta^2).
// Largest eigenvalue (d + 2) v + 2, growing linearly in d whenever v > 0.
inline SymOperatorRep fourth_moment_scale_mixture(Index d, double var_eta_sq) {
  if (d < 1) throw ConfigError("fourth_moment_scale_mixture: dimension must be positive");
  if (var_eta_sq < 0.0)
    throw ConfigError("fourth_moment_scale_mixture: var_eta_sq must be >= 0");
  const Index q = sym_vec_size(d);
  Eigen::VectorXd psi_id = Eigen::VectorXd::Zero(q);
  psi_id.head(d).setOnes();
  Eigen::MatrixXd rep = 2.0 * (var_eta_sq + 1.0) * Eigen::MatrixXd::Identity(q, q);
  rep.noalias() += var_eta_sq * psi_id * psi_id.transpose();
  return SymOperatorRep(d, std::move(rep));
}

enum class Centering {
  sample_mean,  // subtract the sample mean of zeta zeta^T
  identity,     // subtract I (the population mean of standardized scores)
};

// (1/n) sum_i psi(z_i z_i^T - m) psi(z_i z_i^T - m)^T from score rows (n x d).
inline SymOperatorRep empirical_fourth_moment(const Eigen::MatrixXd& scores,
                                              Centering centering = Centering::sample_mean) {
  const Index n = scores.rows();
  const Index d = scores.cols();
  if (n < 2) throw ConfigError("empirical_fourth_moment: need at least 2 samples");
  const Index q = sym_vec_size(d);
  Eigen::MatrixXd center;
  if (centering == Centering::sample_mean) {
    center = sample_covariance(scores).mat();  // (1/n) sum z z^T
  } else {
    center = Eigen::MatrixXd::Identity(d, d);
  }
  const double root2 = std::sqrt(2.0);
  Eigen::MatrixXd cols(q, n);
  for (Index i = 0; i < n; ++i) {
    const auto z = scores.row(i);
    Index s = d;
    for (Index a = 0; a < d; ++a) cols(a, i) = z[a] * z[a] - center(a, a);
    for (Index a = 0; a < d; ++a)
      for (Index b = a + 1; b < d; ++b) cols(s++, i) = root2 * (z[a] * z[b] - center(a, b));
  }
  Eigen::MatrixXd rep = Eigen::MatrixXd::Zero(q, q);
  rep.selfadjointView<Eigen::Lower>().rankUpdate(cols, 1.0 / static_cast<double>(n));
  return SymOperatorRep(d, Eigen::MatrixXd(rep.selfadjointView<Eigen::Lower>()));
}

namespace detail {

struct SpectralFactor {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

inline SpectralFactor spectral_decompose(const Eigen::MatrixXd& s, const char* who) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string(who) + ": eigensolver failed");
  return SpectralFactor{es.eigenvectors(), es.eigenvalues()};
}

}  // namespace detail

// Spectral square root of a PSD matrix. Eigenvalues below -rel_clip * lambda_max
// raise; small negatives are clipped to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s, double rel_clip = 1e-12) {
  auto f = detail::spectral_decompose(s, "psd_sqrt");
  const double top = std::max(f.values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd root(f.values.size());
  for (Index i = 0; i < f.values.size(); ++i) {
    if (f.values[i] < -rel_clip * top)
      throw NumericalError("psd_sqrt: matrix is not positive semidefinite");
    root[i] = std::sqrt(std::max(f.values[i], 0.0));
  }
  return f.vectors * root.asDiagonal() * f.vectors.transpose();
}

// Covariance operator of Y Y^T for Y = Sigma^{1/2} zeta, assembled from the
// score-level operator: R J R with R the psi representation of conjugation
// by Sigma^{1/2}.
inline SymOperatorRep covariance_operator(const SymMatrix& sigma,
                                          const SymOperatorRep& score_op) {
  if (sigma.dim() != score_op.d)
    throw ConfigError("covariance_operator: dimension mismatch");
  const Eigen::MatrixXd r = sym_conjugation(psd_sqrt(sigma.mat()));
  Eigen::MatrixXd rep = r * score_op.rep * r;
  rep = 0.5 * (rep + rep.transpose()).eval();
  return SymOperatorRep(sigma.dim(), std::move(rep));
}

// (1/n) sum_i psi(Y_i Y_i^T - S_k) psi(Y_i Y_i^T - S_k)^T on the leading k
// coordinates, with S_k the sample covariance. This is the covariance
// operator of a single resampled Y* Y*^T given the data.
inline SymOperatorRep empirical_covariance_operator(const Eigen::MatrixXd& obs_cols, Index k) {
  const Index p = obs_cols.rows();
  const Index n = obs_cols.cols();
  if (k < 1 || k > p) throw ConfigError("empirical_covariance_operator: k out of range");
  if (n < 2) throw ConfigError("empirical_covariance_operator: need at least 2 observations");
  const Index q = sym_vec_size(k);
  const Eigen::MatrixXd cov_k = sample_covariance_cols(obs_cols.topRows(k)).mat();
  const double root2 = std::sqrt(2.0);
  Eigen::MatrixXd cols(q, n);
  for (Index i = 0; i < n; ++i) {
    const auto y = obs_cols.col(i).head(k);
    Index s = k;
    for (Index a = 0; a < k; ++a) cols(a, i) = y[a] * y[a] - cov_k(a, a);
    for (Index a = 0; a < k; ++a)
      for (Index b = a + 1; b < k; ++b) cols(s++, i) = root2 * (y[a] * y[b] - cov_k(a, b));
  }
  Eigen::MatrixXd rep = Eigen::MatrixXd::Zero(q, q);
  rep.selfadjointView<Eigen::Lower>().rankUpdate(cols, 1.0 / static_cast<double>(n));
  return SymOperatorRep(k, Eigen::MatrixXd(rep.selfadjointView<Eigen::Lower>()));
}

// Operator norms of centered Gaussian elements of symmetric-matrix space
// with covariance operator c_rep. Eigenvalues in [-1e-10, 0) are floored to
// zero; anything lower is rejected as indefinite.
inline ScalarSample gaussian_norm_sample(const SymOperatorRep& c_rep, Index count,
                                         std::uint64_t seed) {
  if (count < 1) throw ConfigError("gaussian_norm_sample: count must be positive");
  auto f = detail::spectral_decompose(c_rep.rep, "gaussian_norm_sample");
  Eigen::VectorXd root(f.values.size());
  for (Index i = 0; i < f.values.size(); ++i) {
    if (f.values[i] < -1e-10) {
      std::ostringstream msg;
      msg << "gaussian_norm_sample: covariance operator is indefinite (eigenvalue "
          << f.values[i] << ")";
      throw NumericalError(msg.str());
    }
    root[i] = std::sqrt(std::max(f.values[i], 0.0));
  }
  const Eigen::MatrixXd factor = f.vectors * root.asDiagonal();
  const Index q = c_rep.q();
  Rng rng = Rng::derive(seed, {seeds::kGaussNorm});
  Eigen::VectorXd g(q);
  std::vector<double> values(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    for (Index j = 0; j < q; ++j) g[j] = rng.normal();
    values[static_cast<std::size_t>(i)] = operator_norm_sym(sym_unvec((factor * g).eval()));
  }
  return ScalarSample(std::move(values));
}

struct GaussianKl {
  double divergence = 0.0;
  double pinsker_bound = 0.0;  // sup over events of the probability gap is <= this
};

// KL divergence between centered Gaussians with covariance operators
// `other` and `base`: (1/2) (tr(base^{-1} other) - q - log det(base^{-1} other)),
// computed through generalized eigenvalues, never explicit inverses.
inline GaussianKl gaussian_kl(const SymOperatorRep& base, const SymOperatorRep& other) {
  if (base.d != other.d) throw ConfigError("gaussian_kl: dimension mismatch");
  if (base.rep == other.rep) return GaussianKl{0.0, 0.0};
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      other.rep, base.rep, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericalError("gaussian_kl: base operator is singular or not positive definite");
  double sum = 0.0;
  for (Index i = 0; i < ges.eigenvalues().size(); ++i) {
    const double lambda = ges.eigenvalues()[i];
    if (!(lambda > 0.0)) return GaussianKl{std::numeric_limits<double>::infinity(),
                                           std::numeric_limits<double>::infinity()};
    const double x = lambda - 1.0;
    sum += x - std::log1p(x);  // each term >= 0
  }
  const double kl = 0.5 * sum;
  return GaussianKl{kl, std::sqrt(kl / 2.0)};
}

// Whitened psi coordinates M_i = C^{-1/2} psi(S_i - mean(S)), one row per
// sample. Isotropic in the population limit when c_rep is the true
// covariance operator of the samples.
inline Eigen::MatrixXd isotropize(const SymOperatorRep& c_rep,
                                  const std::vector<SymMatrix>& samples) {
  if (samples.empty()) throw ConfigError("isotropize: no samples");
  const Index d = c_rep.d;
  const Index q = c_rep.q();
  auto f = detail::spectral_decompose(c_rep.rep, "isotropize");
  const double top = std::max(f.values.maxCoeff(), 0.0);
  Eigen::VectorXd inv_root(q);
  for (Index i = 0; i < q; ++i) {
    if (f.values[i] <= 1e-12 * std::max(top, 1e-300))
      throw NumericalError("isotropize: covariance operator is singular");
    inv_root[i] = 1.0 / std::sqrt(f.values[i]);
  }
  const Eigen::MatrixXd whitener = f.vectors * inv_root.asDiagonal() * f.vectors.transpose();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) {
    if (s.dim() != d) throw ConfigError("isotropize: sample dimension mismatch");
    mean += s.mat();
  }
  mean /= static_cast<double>(samples.size());
  Eigen::MatrixXd out(static_cast<Index>(samples.size()), q);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.row(static_cast<Index>(i)) =
        (whitener * sym_vec((samples[i].mat() - mean).eval())).transpose();
  }
  return out;
}

// tr(A)^2 / ||A||_F^2 for a non-zero PSD matrix.
inline double stable_rank(const SymMatrix& a) {
  const double fro = a.frobenius_norm();
  if (fro == 0.0) throw ConfigError("stable_rank: zero matrix");
  const double tr = a.trace();
  if (tr <= 0.0) throw ConfigError("stable_rank: matrix is not PSD (non-positive trace)");
  return (tr / fro) * (tr / fro);
}

// tr(A) / ||A||_op for a non-zero PSD matrix.
inline double effective_rank(const SymMatrix& a) {
  if (a.frobenius_norm() == 0.0) throw ConfigError("effective_rank: zero matrix");
  const double tr = a.trace();
  if (tr <= 0.0) throw ConfigError("effective_rank: matrix is not PSD (non-positive trace)");
  return tr / operator_norm_sym(a);
}

}  // namespace covop
