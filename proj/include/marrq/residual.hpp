#ifndef MARRQ_RESIDUAL_HPP
#define MARRQ_RESIDUAL_HPP

#include <vector>

#include "marrq/matrix.hpp"

namespace marrq {

/// Cross-layer activation mismatch r = wX − wX̂ together with its input
/// cross-correlation r·X̂ᵀ, the quantity the scaled residual update consumes.
struct ResidualTarget {
  DenseMatrix r;           // d_out × n_samples
  DenseMatrix cross_corr;  // d_out × d_in, equals r·X̂ᵀ
};

ResidualTarget compute_residual(const DenseMatrix& w, const DenseMatrix& x_fp,
                                const DenseMatrix& x_hat);

/// Output MSE between the FP reference and the reconstructed module output.
double module_objective(const DenseMatrix& z_fp, const DenseMatrix& z_quant);

/// Per-sample decomposition of the Hessian-approximation bias. With
/// a = Δw·X̂ the three bound terms are |aᵀΔH_z a|, 2|aᵀΔH_z r| and
/// |rᵀΔH_z r|, and signed_term is (a−r)ᵀΔH_z(a−r). Per sample,
/// |signed_term| ≤ term_w + term_cross + term_rr.
struct BiasDecomposition {
  std::vector<double> term_w;
  std::vector<double> term_cross;
  std::vector<double> term_rr;
  std::vector<double> signed_term;
  double mean_term_w = 0.0;
  double mean_term_cross = 0.0;
  double mean_term_rr = 0.0;
  double mean_signed = 0.0;
};

BiasDecomposition hessian_bias_decomposition(const DenseMatrix& dw,
                                             const DenseMatrix& x_hat,
                                             const DenseMatrix& r,
                                             const DenseMatrix& delta_hz);

}  // namespace marrq

#endif
