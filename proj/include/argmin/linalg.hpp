#pragma once

#include <Eigen/Core>

namespace argmin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/**
 * Dense symmetric matrix. The input is symmetrized on construction, so every
 * instance is exactly symmetric regardless of the caller's rounding.
 */
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat zero(Eigen::Index n);
  static SymMat identity(Eigen::Index n);
  static SymMat diagonal(const Vec& d);

  Eigen::Index dim() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  Vec operator*(const Vec& v) const { return m_ * v; }
  SymMat& operator+=(const SymMat& other);
  SymMat& add_scaled_identity(double s);
  /// this += s * v v^T
  SymMat& add_rank_one(double s, const Vec& v);

  bool all_finite() const { return m_.allFinite(); }

 private:
  Mat m_;
};

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors (columns).
struct EigDecomp {
  Vec eigvals;
  Mat eigvecs;

  Eigen::Index dim() const { return eigvals.size(); }
  double lambda_min() const { return eigvals(0); }
  double lambda_max() const { return eigvals(eigvals.size() - 1); }
  Mat reconstruct() const;
};

/// Symmetric eigendecomposition. Throws Error(kNonFinite) on NaN/Inf input.
EigDecomp sym_eig(const SymMat& h);

/// Solves (H + shift I) h = -g from a precomputed decomposition of H.
/// Throws Error(kShiftTooSmall) unless lambda_min + shift > 0.
Vec solve_shifted(const EigDecomp& e, double shift, const Vec& g);

/// Spectral norm of a symmetric matrix (max |eigenvalue|).
double spectral_norm(const SymMat& h);

bool all_finite(const Vec& v);

}  // namespace argmin
