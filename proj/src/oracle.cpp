#include "marrq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marrq::oracle {

std::vector<double> lu_solve(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw std::invalid_argument("lu_solve: dimension mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a.at(i, k)) > std::fabs(a.at(piv, k))) piv = i;
    }
    if (a.at(piv, k) == 0.0) {
      throw std::runtime_error("lu_solve: singular matrix");
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a.at(i, k) / a.at(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a.at(ii, j) * x[j];
    x[ii] = s / a.at(ii, ii);
  }
  return x;
}

DenseMatrix lu_invert(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("lu_invert: matrix not square");
  DenseMatrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e.assign(n, 0.0);
    e[c] = 1.0;
    const std::vector<double> col = lu_solve(a, e);
    for (std::size_t i = 0; i < n; ++i) inv.at(i, c) = col[i];
  }
  return inv;
}

std::vector<double> constrained_ls_row(const DenseMatrix& x_hat,
                                       std::span<const double> target_row,
                                       std::size_t q, double d_q,
                                       const std::vector<std::size_t>& fixed_zero,
                                       double lambda) {
  const std::size_t d = x_hat.rows();
  const std::size_t n = x_hat.cols();
  if (target_row.size() != n) {
    throw std::invalid_argument("constrained_ls_row: target length mismatch");
  }
  std::vector<char> zeroed(d, 0);
  for (std::size_t j : fixed_zero) zeroed[j] = 1;
  if (q >= d || zeroed[q]) {
    throw std::invalid_argument("constrained_ls_row: bad constrained coordinate");
  }
  std::vector<std::size_t> free_idx;
  for (std::size_t j = 0; j < d; ++j) {
    if (j != q && !zeroed[j]) free_idx.push_back(j);
  }

  std::vector<double> dw(d, 0.0);
  dw[q] = d_q;
  if (free_idx.empty()) return dw;

  const std::size_t f = free_idx.size();
  DenseMatrix gram(f, f);
  for (std::size_t a = 0; a < f; ++a) {
    const double* ra = x_hat.row(free_idx[a]);
    for (std::size_t b = 0; b <= a; ++b) {
      const double* rb = x_hat.row(free_idx[b]);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ra[k] * rb[k];
      gram.at(a, b) = s;
      gram.at(b, a) = s;
    }
    gram.at(a, a) += lambda;
  }
  std::vector<double> rhs(f, 0.0);
  const double* rq = x_hat.row(q);
  for (std::size_t a = 0; a < f; ++a) {
    const double* ra = x_hat.row(free_idx[a]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += (target_row[k] - d_q * rq[k]) * ra[k];
    rhs[a] = s;
  }
  const std::vector<double> sol = lu_solve(gram, rhs);
  for (std::size_t a = 0; a < f; ++a) dw[free_idx[a]] = sol[a];
  return dw;
}

DenseMatrix constrained_ls(const DenseMatrix& x_hat, const DenseMatrix& target,
                           std::size_t q, const std::vector<double>& q_values,
                           const DenseMatrix& w, const std::vector<std::size_t>& fixed_zero,
                           double lambda) {
  const std::size_t d_out = target.rows();
  if (q_values.size() != d_out || w.rows() != d_out) {
    throw std::invalid_argument("constrained_ls: row count mismatch");
  }
  DenseMatrix dw(d_out, x_hat.rows());
  for (std::size_t i = 0; i < d_out; ++i) {
    const std::vector<double> row = constrained_ls_row(
        x_hat, std::span<const double>(target.row(i), target.cols()), q,
        q_values[i] - w.at(i, q), fixed_zero, lambda);
    for (std::size_t j = 0; j < dw.cols(); ++j) dw.at(i, j) = row[j];
  }
  return dw;
}

double ls_objective(const DenseMatrix& dw, const DenseMatrix& x_hat,
                    const DenseMatrix& target) {
  const DenseMatrix pred = matmul(dw, x_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    acc += d * d;
  }
  return acc;
}

DenseMatrix principal_submatrix_inverse(const DenseMatrix& a,
                                        const std::vector<std::size_t>& keep) {
  const std::size_t k = keep.size();
  DenseMatrix sub(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) sub.at(i, j) = a.at(keep[i], keep[j]);
  }
  const DenseMatrix sub_inv = lu_invert(sub);
  DenseMatrix full(a.rows(), a.cols(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) full.at(keep[i], keep[j]) = sub_inv.at(i, j);
  }
  return full;
}

}  // namespace marrq::oracle
