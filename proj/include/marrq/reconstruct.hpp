#ifndef MARRQ_RECONSTRUCT_HPP
#define MARRQ_RECONSTRUCT_HPP

#include <optional>
#include <string>
#include <vector>

#include "marrq/hessian.hpp"
#include "marrq/matrix.hpp"
#include "marrq/quantizer.hpp"
#include "marrq/residual.hpp"

namespace marrq {

/// Reconstruction method. Residual(0) runs the identical code path as Gptq;
/// Residual(1) is the plain residual-reconstruction configuration. Marr is
/// resolved to a concrete Residual(alpha) by the pipeline's feedback loop
/// before a sweep runs.
struct ReconMethod {
  enum class Kind { Rtn, Gptq, Residual, Marr };
  Kind kind = Kind::Gptq;
  double alpha = 0.0;

  static ReconMethod rtn() { return {Kind::Rtn, 0.0}; }
  static ReconMethod gptq() { return {Kind::Gptq, 0.0}; }
  static ReconMethod residual(double a) { return {Kind::Residual, a}; }
  static ReconMethod marr() { return {Kind::Marr, 0.0}; }

  bool needs_target() const { return kind == Kind::Residual || kind == Kind::Marr; }
  std::string label() const;
};

enum class ColumnOrder { Natural, DescendingDiag };

struct ColumnLogEntry {
  std::size_t q;
  double d_q_norm;     // ‖ŵ_q − w_q‖ over rows
  double update_norm;  // ‖Δw‖_F for this step
};

struct SweepOptions {
  ColumnOrder order = ColumnOrder::Natural;
  bool keep_column_log = false;
};

struct SweepResult {
  DenseMatrix quantized_weight;
  DenseMatrix applied_dw;       // quantized_weight − original weight
  std::size_t objective_evals = 0;
  std::vector<ColumnLogEntry> per_column_log;
};

/// Closed-form perturbation for quantizing column q of every row at once:
///   Δw = (ŵ_q − w_q)/H⁻¹_qq · H⁻¹_{q,:}  +  α · (r X̂ᵀ) · H⁻¹_{−q}
/// The second term is skipped entirely when alpha == 0, so the α = 0 path is
/// arithmetic-for-arithmetic the basic update. Δw[i][q] == ŵ_q − w_q holds
/// exactly for every row.
DenseMatrix scaled_column_update(const DenseMatrix& w_rows, std::size_t q,
                                 const std::vector<double>& q_values,
                                 const HessianState& state,
                                 const ResidualTarget* target, double alpha);

/// Column-by-column sweep: quantize column q on its per-channel grid, spread
/// the closed-form compensation over the remaining columns, fold the applied
/// update into the residual bookkeeping (r ← r − ΔwX̂, cross_corr ← cross_corr
/// − ΔwH with H = X̂X̂ᵀ), then eliminate q. The state must arrive freshly
/// inverted; `target` is required for residual methods and is consumed
/// (updated in place). 16-bit weight configs pass the weight through.
SweepResult reconstruct_module(const DenseMatrix& weight, const QuantConfig& config,
                               const ReconMethod& method, HessianState& state,
                               ResidualTarget* target, const DenseMatrix& x_hat,
                               const SweepOptions& options = {});

std::vector<std::size_t> column_order(const HessianState& state, ColumnOrder order);

}  // namespace marrq

#endif
