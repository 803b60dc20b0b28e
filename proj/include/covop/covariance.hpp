#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "covop/common.hpp"

namespace covop {

using Eigen::Index;

// Dense symmetric matrix. Symmetry is an invariant, enforced at construction
// by (A + A^T)/2; the wrapped matrix is immutable afterwards.
template <typename Scalar>
class SymMatrixT {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  template <typename Derived>
  explicit SymMatrixT(const Eigen::MatrixBase<Derived>& a)
      : m_(((a + a.transpose()) / Scalar(2)).eval()) {
    if (a.rows() != a.cols()) throw ConfigError("SymMatrix: matrix must be square");
  }

  static SymMatrixT identity(Index d) { return SymMatrixT(Mat::Identity(d, d)); }

  template <typename Derived>
  static SymMatrixT diagonal(const Eigen::MatrixBase<Derived>& diag) {
    return SymMatrixT(diag.asDiagonal().toDenseMatrix());
  }

  Index dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }

  Scalar trace() const { return m_.trace(); }
  Scalar frobenius_norm() const { return m_.norm(); }

  SymMatrixT top_left(Index k) const {
    if (k < 1 || k > dim()) throw ConfigError("SymMatrix: block size out of range");
    return SymMatrixT(m_.topLeftCorner(k, k));
  }

 private:
  Mat m_;
};

using SymMatrix = SymMatrixT<double>;

namespace detail {

// Lanczos with full reorthogonalization for the extremal eigenvalues of a
// symmetric matrix. Deterministic start vector. Throws with diagnostics on
// non-convergence rather than returning a silently wrong norm.
template <typename Derived>
double spectral_radius_lanczos(const Eigen::MatrixBase<Derived>& a, double tol, int max_iter) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index d = a.rows();
  const int m_max = static_cast<int>(std::min<Index>(d, max_iter));

  Vec v = Vec::Ones(d);
  for (Index i = 0; i < d; ++i) v[i] += Scalar(0.5) * std::cos(static_cast<double>(i) + 1.0);
  v /= v.norm();

  Mat basis(d, m_max);
  std::vector<Scalar> alpha;
  std::vector<Scalar> beta;
  basis.col(0) = v;
  Vec w;
  for (int j = 0; j < m_max; ++j) {
    w = a.derived().template selfadjointView<Eigen::Lower>() * basis.col(j);
    const Scalar aj = basis.col(j).dot(w);
    alpha.push_back(aj);
    w -= aj * basis.col(j);
    if (j > 0) w -= beta[static_cast<std::size_t>(j) - 1] * basis.col(j - 1);
    // Full reorthogonalization; cheap at these sizes and removes ghost pairs.
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    const Scalar bj = w.norm();

    const int mm = j + 1;
    Mat t = Mat::Zero(mm, mm);
    for (int i = 0; i < mm; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < mm; ++i)
      t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    if (es.info() != Eigen::Success)
      throw NumericalError("operator_norm_sym: tridiagonal eigensolver failed");
    const auto& ev = es.eigenvalues();
    const auto& evec = es.eigenvectors();
    const double lo = ev(0);
    const double hi = ev(mm - 1);
    const double radius = std::max(std::abs(lo), std::abs(hi));
    const double res_lo = std::abs(bj * evec(mm - 1, 0));
    const double res_hi = std::abs(bj * evec(mm - 1, mm - 1));
    const double scale = std::max(radius, 1e-300);
    if ((std::max(res_lo, res_hi) <= tol * scale && mm >= 2) || bj <= Scalar(1e-14) * scale ||
        mm == static_cast<int>(d)) {
      return radius;
    }
    beta.push_back(bj);
    if (j + 1 < m_max) basis.col(j + 1) = w / bj;
  }
  std::ostringstream msg;
  msg << "operator_norm_sym: Lanczos did not converge (dim=" << d << ", iter=" << m_max
      << ", tol=" << tol << ")";
  throw NumericalError(msg.str());
}

}  // namespace detail

// Largest |eigenvalue| of a symmetric matrix. Full symmetric
// eigendecomposition up to dense_limit, Lanczos iteration above it.
// Only the lower triangle of the input is referenced.
template <typename Derived>
double operator_norm_sym(const Eigen::MatrixBase<Derived>& a, Index dense_limit = 512) {
  if (a.rows() != a.cols()) throw ConfigError("operator_norm_sym: matrix must be square");
  const Index d = a.rows();
  if (d == 0) throw ConfigError("operator_norm_sym: empty matrix");
  if (d == 1) return std::abs(static_cast<double>(a(0, 0)));
  if (d <= dense_limit) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.compute(a.derived(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "operator_norm_sym: eigensolver failed to converge (dim=" << d << ")";
      throw NumericalError(msg.str());
    }
    return std::max(std::abs(static_cast<double>(es.eigenvalues()(0))),
                    std::abs(static_cast<double>(es.eigenvalues()(d - 1))));
  }
  return detail::spectral_radius_lanczos(a, 1e-11, 300);
}

template <typename Scalar>
double operator_norm_sym(const SymMatrixT<Scalar>& a) {
  return operator_norm_sym(a.mat());
}

// (1/n) sum_i x_i x_i^T for observations stored as columns (p x n).
// The model is centered, so no mean is subtracted.
template <typename Derived>
SymMatrixT<typename Derived::Scalar> sample_covariance_cols(
    const Eigen::MatrixBase<Derived>& obs) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index n = obs.cols();
  if (n < 1) throw ConfigError("sample_covariance: need at least one observation");
  Mat s = Mat::Zero(obs.rows(), obs.rows());
  s.template selfadjointView<Eigen::Lower>().rankUpdate(obs.derived(), Scalar(1) / Scalar(n));
  return SymMatrixT<Scalar>(Mat(s.template selfadjointView<Eigen::Lower>()));
}

// Same estimator for data laid out as rows (n x p), the Dataset convention.
template <typename Derived>
SymMatrixT<typename Derived::Scalar> sample_covariance(const Eigen::MatrixBase<Derived>& rows) {
  return sample_covariance_cols(rows.derived().transpose());
}

// (1/n) sum_i w_i x_i x_i^T with observations as columns. Weights may be
// signed, so the accumulation is split into two PSD rank updates with
// sqrt(|w|)-scaled columns.
template <typename Derived, typename WDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> weighted_scatter_cols(
    const Eigen::MatrixBase<Derived>& obs, const Eigen::MatrixBase<WDerived>& w) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index p = obs.rows();
  const Index n = obs.cols();
  if (w.size() != n) throw ConfigError("weighted_scatter: weight length mismatch");
  Mat pos(p, n);
  Mat neg(p, n);
  Index np = 0;
  Index nn = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar wi = w(i);
    if (wi > Scalar(0)) {
      pos.col(np++) = obs.col(i) * std::sqrt(static_cast<double>(wi));
    } else if (wi < Scalar(0)) {
      neg.col(nn++) = obs.col(i) * std::sqrt(static_cast<double>(-wi));
    }
  }
  Mat s = Mat::Zero(p, p);
  const Scalar inv_n = Scalar(1) / Scalar(n);
  if (np > 0) s.template selfadjointView<Eigen::Lower>().rankUpdate(pos.leftCols(np), inv_n);
  if (nn > 0) s.template selfadjointView<Eigen::Lower>().rankUpdate(neg.leftCols(nn), -inv_n);
  return Mat(s.template selfadjointView<Eigen::Lower>());
}

// sqrt(n) * || sample_covariance - sigma ||_op, observations as columns.
template <typename Derived>
double t_statistic_cols(const Eigen::MatrixBase<Derived>& obs, const SymMatrix& sigma) {
  if (obs.rows() != sigma.dim())
    throw ConfigError("t_statistic: sigma dimension does not match data dimension");
  const auto cov = sample_covariance_cols(obs);
  return std::sqrt(static_cast<double>(obs.cols())) *
         operator_norm_sym((cov.mat() - sigma.mat()).eval());
}

// Same statistic on the leading k coordinates (top-left k x k blocks).
template <typename Derived>
double projected_t_statistic_cols(const Eigen::MatrixBase<Derived>& obs, const SymMatrix& sigma,
                                  Index k) {
  if (obs.rows() != sigma.dim())
    throw ConfigError("projected_t_statistic: sigma dimension does not match data dimension");
  if (k < 1 || k > obs.rows()) throw ConfigError("projected_t_statistic: k out of range");
  const auto cov = sample_covariance_cols(obs.derived().topRows(k));
  return std::sqrt(static_cast<double>(obs.cols())) *
         operator_norm_sym((cov.mat() - sigma.mat().topLeftCorner(k, k)).eval());
}

// ceil(min(n^{1/(2*beta+4)}, dim)). Exact integer powers are snapped before
// the ceiling so that e.g. n=1e6, beta=1 yields 10 and not 11.
inline int k_index(long n, double beta, int dim) {
  if (n < 1) throw ConfigError("k_index: n must be positive");
  if (dim < 1) throw ConfigError("k_index: dim must be positive");
  if (!(beta > 0.5)) throw ConfigError("k_index: beta must exceed 1/2");
  double x = std::pow(static_cast<double>(n), 1.0 / (2.0 * beta + 4.0));
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) x = r;
  x = std::min(x, static_cast<double>(dim));
  return static_cast<int>(std::ceil(x));
}

}  // namespace covop
