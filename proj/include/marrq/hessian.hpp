#ifndef MARRQ_HESSIAN_HPP
#define MARRQ_HESSIAN_HPP

#include <vector>

#include "marrq/matrix.hpp"

namespace marrq {

/// Damped input Gram matrix H = X̂X̂ᵀ + λI, its inverse, and the coordinates
/// already removed from future compensation. `h` stores the damped matrix.
/// For every eliminated coordinate q, row q and column q of h_inv are exactly
/// zero.
struct HessianState {
  DenseMatrix h;
  DenseMatrix h_inv;
  std::vector<std::size_t> eliminated;
  std::vector<char> eliminated_mask;
  double damping_lambda = 0.0;

  bool is_eliminated(std::size_t q) const {
    return q < eliminated_mask.size() && eliminated_mask[q] != 0;
  }
  std::size_t dim() const { return h.rows(); }
};

/// H = Σ_b X̂_b X̂_bᵀ over calibration batches (columns are samples).
DenseMatrix accumulate_hessian(const std::vector<DenseMatrix>& x_hat_batches);

/// λ = percent × mean(diag(h)), floored at 1e-10; returns the state holding
/// h + λI and its Cholesky inverse with an empty eliminated set.
HessianState damp_and_invert(const DenseMatrix& h, double percent);

/// Rank-1 removal of coordinate q from h_inv:
///   h_inv ← h_inv − h_inv[:,q]·h_inv[q,:] / h_inv[q][q]
/// followed by exact zeroing of row/column q. Throws on a vanishing pivot.
void eliminate_coordinate(HessianState& state, std::size_t q);

/// The matrix H⁻¹₋q as a value, without touching `h_inv` (used by the column
/// update before the sweep commits the elimination).
DenseMatrix eliminated_inverse(const DenseMatrix& h_inv, std::size_t q);

}  // namespace marrq

#endif
