#include "marrq/hessian.hpp"

#include <cmath>
#include <stdexcept>

namespace marrq {

namespace {
constexpr double kLambdaFloor = 1e-10;
constexpr double kPivotFloor = 1e-300;
}  // namespace

DenseMatrix accumulate_hessian(const std::vector<DenseMatrix>& x_hat_batches) {
  if (x_hat_batches.empty()) {
    throw std::invalid_argument("accumulate_hessian: no batches");
  }
  const std::size_t d = x_hat_batches.front().rows();
  DenseMatrix h(d, d, 0.0);
  for (const DenseMatrix& x : x_hat_batches) {
    if (x.rows() != d) {
      throw std::invalid_argument("accumulate_hessian: batch row dimension mismatch");
    }
    // h += x xᵀ, lower triangle then mirror.
    for (std::size_t i = 0; i < d; ++i) {
      const double* ri = x.row(i);
      for (std::size_t j = 0; j <= i; ++j) {
        const double* rj = x.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < x.cols(); ++k) s += ri[k] * rj[k];
        h.at(i, j) += s;
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) h.at(i, j) = h.at(j, i);
  }
  return h;
}

HessianState damp_and_invert(const DenseMatrix& h, double percent) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("damp_and_invert: matrix not square");
  }
  if (!(percent > 0.0)) {
    throw std::invalid_argument("damp_and_invert: percent must be > 0");
  }
  const std::size_t d = h.rows();
  double mean_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean_diag += h.at(i, i);
  mean_diag /= static_cast<double>(d);

  HessianState state;
  state.damping_lambda = std::max(percent * mean_diag, kLambdaFloor);
  state.h = h;
  for (std::size_t i = 0; i < d; ++i) state.h.at(i, i) += state.damping_lambda;
  try {
    state.h_inv = cholesky_inverse(state.h);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) +
                             " (damp_and_invert: try a larger damping percent)");
  }
  state.eliminated.clear();
  state.eliminated_mask.assign(d, 0);
  return state;
}

DenseMatrix eliminated_inverse(const DenseMatrix& h_inv, std::size_t q) {
  const std::size_t d = h_inv.rows();
  if (q >= d) throw std::invalid_argument("eliminated_inverse: index out of range");
  const double pivot = h_inv.at(q, q);
  if (!(std::fabs(pivot) > kPivotFloor)) {
    throw std::runtime_error(
        "eliminate_coordinate: vanishing pivot, Hessian catastrophically "
        "conditioned");
  }
  DenseMatrix out = h_inv;
  for (std::size_t i = 0; i < d; ++i) {
    const double f = h_inv.at(i, q) / pivot;
    if (f == 0.0) continue;
    const double* rq = h_inv.row(q);
    double* ri = out.row(i);
    for (std::size_t j = 0; j < d; ++j) ri[j] -= f * rq[j];
  }
  // The formula leaves row/column q at rounding-noise level; zero exactly so
  // stale entries never leak into later updates.
  for (std::size_t j = 0; j < d; ++j) out.at(q, j) = 0.0;
  for (std::size_t i = 0; i < d; ++i) out.at(i, q) = 0.0;
  return out;
}

void eliminate_coordinate(HessianState& state, std::size_t q) {
  if (state.is_eliminated(q)) {
    throw std::invalid_argument("eliminate_coordinate: coordinate already eliminated");
  }
  state.h_inv = eliminated_inverse(state.h_inv, q);
  state.eliminated.push_back(q);
  if (state.eliminated_mask.size() < state.dim()) {
    state.eliminated_mask.assign(state.dim(), 0);
    for (std::size_t e : state.eliminated) state.eliminated_mask[e] = 1;
  } else {
    state.eliminated_mask[q] = 1;
  }
}

}  // namespace marrq
