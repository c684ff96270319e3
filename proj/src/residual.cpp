#include "marrq/residual.hpp"

#include <cmath>
#include <stdexcept>

namespace marrq {

ResidualTarget compute_residual(const DenseMatrix& w, const DenseMatrix& x_fp,
                                const DenseMatrix& x_hat) {
  if (!x_fp.same_shape(x_hat)) {
    throw std::invalid_argument("compute_residual: x_fp and x_hat shapes differ");
  }
  if (w.cols() != x_fp.rows()) {
    throw std::invalid_argument("compute_residual: weight/input dimension mismatch");
  }
  ResidualTarget target;
  target.r = matmul(w, subtract(x_fp, x_hat));
  target.cross_corr = matmul(target.r, transpose(x_hat));
  return target;
}

double module_objective(const DenseMatrix& z_fp, const DenseMatrix& z_quant) {
  return frobenius_mse(z_fp, z_quant);
}

namespace {
// vᵀ M u for column j of two sample matrices.
double quadratic_form(const DenseMatrix& v, const DenseMatrix& m,
                      const DenseMatrix& u, std::size_t j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double mu = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) mu += m.at(i, k) * u.at(k, j);
    acc += v.at(i, j) * mu;
  }
  return acc;
}
}  // namespace

BiasDecomposition hessian_bias_decomposition(const DenseMatrix& dw,
                                             const DenseMatrix& x_hat,
                                             const DenseMatrix& r,
                                             const DenseMatrix& delta_hz) {
  if (delta_hz.rows() != delta_hz.cols()) {
    throw std::invalid_argument("hessian_bias_decomposition: delta_hz not square");
  }
  double asym = 0.0;
  for (std::size_t i = 0; i < delta_hz.rows(); ++i) {
    for (std::size_t j = i + 1; j < delta_hz.cols(); ++j) {
      asym = std::max(asym, std::fabs(delta_hz.at(i, j) - delta_hz.at(j, i)));
    }
  }
  if (asym > 1e-10 * std::max(max_abs(delta_hz), 1.0)) {
    throw std::invalid_argument("hessian_bias_decomposition: delta_hz not symmetric");
  }
  const DenseMatrix a = matmul(dw, x_hat);
  if (!a.same_shape(r)) {
    throw std::invalid_argument("hessian_bias_decomposition: residual shape mismatch");
  }
  if (a.rows() != delta_hz.rows()) {
    throw std::invalid_argument("hessian_bias_decomposition: delta_hz dimension mismatch");
  }
  const std::size_t n = a.cols();
  const DenseMatrix amr = subtract(a, r);

  BiasDecomposition out;
  out.term_w.resize(n);
  out.term_cross.resize(n);
  out.term_rr.resize(n);
  out.signed_term.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.term_w[j] = std::fabs(quadratic_form(a, delta_hz, a, j));
    out.term_cross[j] = 2.0 * std::fabs(quadratic_form(a, delta_hz, r, j));
    out.term_rr[j] = std::fabs(quadratic_form(r, delta_hz, r, j));
    out.signed_term[j] = quadratic_form(amr, delta_hz, amr, j);
    out.mean_term_w += out.term_w[j];
    out.mean_term_cross += out.term_cross[j];
    out.mean_term_rr += out.term_rr[j];
    out.mean_signed += out.signed_term[j];
  }
  if (n > 0) {
    const double inv_n = 1.0 / static_cast<double>(n);
    out.mean_term_w *= inv_n;
    out.mean_term_cross *= inv_n;
    out.mean_term_rr *= inv_n;
    out.mean_signed *= inv_n;
  }
  return out;
}

}  // namespace marrq
