#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace vbvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using Cholesky = Eigen::LLT<Matrix>;

namespace linalg {

/// Cholesky factorization; throws ErrorCode::kNotPositiveDefinite naming `what` on failure.
Cholesky cholesky(const Matrix& a, std::string_view what);

/// ln|A| from a successful factorization.
double log_det(const Cholesky& llt);
double log_det_spd(const Matrix& a, std::string_view what);

Matrix inverse(const Cholesky& llt);
Matrix inverse_spd(const Matrix& a, std::string_view what);

bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

// Square, symmetric to 1e-12 relative, and Cholesky-factorable.
void require_spd(const Matrix& a, std::string_view what);

Matrix symmetrize(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

// Column-major vectorization (stack columns).
Vector vec(const Matrix& a);
Matrix unvec(const Vector& v, Index rows, Index cols);

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> terms);

}  // namespace linalg
}  // namespace vbvar
