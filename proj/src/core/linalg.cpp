#include "core/linalg.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace vbvar::linalg {

Cholesky cholesky(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": matrix is not square");
  }
  Cholesky llt(a);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().diagonal().allFinite()) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

double log_det(const Cholesky& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double log_det_spd(const Matrix& a, std::string_view what) {
  return log_det(cholesky(a, what));
}

Matrix inverse(const Cholesky& llt) {
  const Index n = llt.matrixLLT().rows();
  return symmetrize(llt.solve(Matrix::Identity(n, n)));
}

Matrix inverse_spd(const Matrix& a, std::string_view what) {
  return inverse(cholesky(a, what));
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_spd(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": expected a non-empty square matrix");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": contains non-finite entries");
  }
  if (!is_symmetric(a)) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + ": matrix is not symmetric");
  }
  cholesky(a, what);
}

Matrix symmetrize(const Matrix& a) {
  return 0.5 * (a + a.transpose());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch, "unvec: size does not match the requested shape");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double compensated_sum(std::span<const double> terms) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

}  // namespace vbvar::linalg
