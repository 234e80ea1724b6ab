#include "argmin/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "argmin/error.hpp"

namespace argmin {

SymMat::SymMat(const Mat& m) : m_(0.5 * (m + m.transpose())) {}

SymMat SymMat::zero(Eigen::Index n) { return SymMat(Mat::Zero(n, n)); }

SymMat SymMat::identity(Eigen::Index n) { return SymMat(Mat::Identity(n, n)); }

SymMat SymMat::diagonal(const Vec& d) { return SymMat(Mat(d.asDiagonal())); }

SymMat& SymMat::operator+=(const SymMat& other) {
  m_ += other.m_;
  return *this;
}

SymMat& SymMat::add_scaled_identity(double s) {
  m_.diagonal().array() += s;
  return *this;
}

SymMat& SymMat::add_rank_one(double s, const Vec& v) {
  // v v^T is symmetric in exact arithmetic and also in floating point.
  m_.noalias() += s * v * v.transpose();
  return *this;
}

Mat EigDecomp::reconstruct() const {
  return eigvecs * eigvals.asDiagonal() * eigvecs.transpose();
}

EigDecomp sym_eig(const SymMat& h) {
  if (h.dim() < 1) throw Error(ErrorCode::kInvalidArgument, "sym_eig: empty matrix");
  if (!h.all_finite()) throw Error(ErrorCode::kNonFinite, "sym_eig: matrix has NaN/Inf entries");
  Eigen::SelfAdjointEigenSolver<Mat> solver(h.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::kNoConvergence, "sym_eig: symmetric QR iteration failed");
  return EigDecomp{solver.eigenvalues(), solver.eigenvectors()};
}

Vec solve_shifted(const EigDecomp& e, double shift, const Vec& g) {
  if (!(e.lambda_min() + shift > 0.0))
    throw Error(ErrorCode::kShiftTooSmall, "solve_shifted: lambda_min + shift = " +
                                               std::to_string(e.lambda_min() + shift));
  Vec coeffs = e.eigvecs.transpose() * g;
  coeffs.array() /= (e.eigvals.array() + shift);
  return -(e.eigvecs * coeffs);
}

double spectral_norm(const SymMat& h) {
  if (h.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace argmin
