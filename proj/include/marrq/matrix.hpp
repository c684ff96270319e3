#ifndef MARRQ_MATRIX_HPP
#define MARRQ_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace marrq {

/// Row-major dense real matrix in 64-bit floating point. The single tensor
/// carrier for weights, calibration activations, Hessians and residuals.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double s);

/// Inverse of a symmetric positive definite matrix via Cholesky factorization.
/// Inputs asymmetric beyond 1e-10 relative are symmetrized as (H+Hᵀ)/2 and
/// counted in symmetrize_warning_count(). Throws if a pivot is non-positive
/// (caller should raise damping) or if the residual ‖H·H⁻¹−I‖_max exceeds
/// residual_tol relative to ‖H⁻¹‖_max.
DenseMatrix cholesky_inverse(const DenseMatrix& h, double residual_tol = 1e-8);

/// Mean over all elements of the squared difference.
double frobenius_mse(const DenseMatrix& a, const DenseMatrix& b);

double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Number of times cholesky_inverse had to symmetrize its input.
std::size_t symmetrize_warning_count();
void reset_symmetrize_warning_count();

}  // namespace marrq

#endif
