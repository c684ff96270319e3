#ifndef MARRQ_ORACLE_HPP
#define MARRQ_ORACLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "marrq/matrix.hpp"

namespace marrq::oracle {

// Independent verification routes for the closed-form reconstruction path.
// Everything here goes through plain Gaussian elimination with partial
// pivoting and never touches the Cholesky/elimination code it checks.

std::vector<double> lu_solve(DenseMatrix a, std::vector<double> b);
DenseMatrix lu_invert(const DenseMatrix& a);

/// Minimizer of ‖Δw X̂ − t‖² + λ‖Δw‖² over a single weight row, subject to
/// Δw[q] = d_q and Δw[j] = 0 for every j in `fixed_zero`. Solved through the
/// normal equations on the free coordinate block.
std::vector<double> constrained_ls_row(const DenseMatrix& x_hat,
                                       std::span<const double> target_row,
                                       std::size_t q, double d_q,
                                       const std::vector<std::size_t>& fixed_zero,
                                       double lambda);

/// Row-stacked version of constrained_ls_row: each row i is solved with its
/// own d_q = q_values[i] and target row.
DenseMatrix constrained_ls(const DenseMatrix& x_hat, const DenseMatrix& target,
                           std::size_t q, const std::vector<double>& q_values,
                           const DenseMatrix& w, const std::vector<std::size_t>& fixed_zero,
                           double lambda);

/// ‖Δw X̂ − t‖²_F (sum form, the objective the constrained solver minimizes
/// up to the ridge term).
double ls_objective(const DenseMatrix& dw, const DenseMatrix& x_hat,
                    const DenseMatrix& target);

/// Inverse of the principal submatrix a[keep, keep], scattered back to full
/// size with zeros elsewhere (the Schur-elimination reference).
DenseMatrix principal_submatrix_inverse(const DenseMatrix& a,
                                        const std::vector<std::size_t>& keep);

}  // namespace marrq::oracle

namespace marrq {

struct SelfTestOptions {
  bool verbose = false;
  std::uint64_t seed = 20240811;
};

/// Runs the oracle-equivalence suite (constrained LS, Schur elimination,
/// reduction identities) on seeded instances. Returns true iff every
/// property holds; prints one line per property.
bool run_selftest(const SelfTestOptions& options);

}  // namespace marrq

#endif
