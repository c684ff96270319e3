#include "marrq/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace marrq {

namespace {
constexpr double kPivotFloor = 1e-300;
}

std::string ReconMethod::label() const {
  switch (kind) {
    case Kind::Rtn:
      return "rtn";
    case Kind::Gptq:
      return "gptq";
    case Kind::Residual: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "residual:%.17g", alpha);
      return buf;
    }
    case Kind::Marr:
      return "marr";
  }
  return "?";
}

std::vector<std::size_t> column_order(const HessianState& state, ColumnOrder order) {
  std::vector<std::size_t> idx(state.dim());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (order == ColumnOrder::DescendingDiag) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return state.h.at(a, a) > state.h.at(b, b);
    });
  }
  return idx;
}

DenseMatrix scaled_column_update(const DenseMatrix& w_rows, std::size_t q,
                                 const std::vector<double>& q_values,
                                 const HessianState& state,
                                 const ResidualTarget* target, double alpha) {
  const std::size_t d_in = state.dim();
  const std::size_t d_out = w_rows.rows();
  if (w_rows.cols() != d_in) {
    throw std::invalid_argument("scaled_column_update: weight/Hessian dimension mismatch");
  }
  if (q >= d_in || state.is_eliminated(q)) {
    throw std::invalid_argument("scaled_column_update: bad or eliminated coordinate");
  }
  if (q_values.size() != d_out) {
    throw std::invalid_argument("scaled_column_update: q_values length mismatch");
  }
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("scaled_column_update: alpha not finite");
  }
  const double pivot = state.h_inv.at(q, q);
  if (!(std::fabs(pivot) > kPivotFloor)) {
    throw std::runtime_error("scaled_column_update: H^-1[q][q] below pivot floor");
  }

  DenseMatrix dw(d_out, d_in, 0.0);
  const double* hq = state.h_inv.row(q);
  for (std::size_t i = 0; i < d_out; ++i) {
    const double f = (q_values[i] - w_rows.at(i, q)) / pivot;
    double* di = dw.row(i);
    for (std::size_t j = 0; j < d_in; ++j) di[j] = f * hq[j];
  }

  if (alpha != 0.0) {
    if (target == nullptr) {
      throw std::invalid_argument("scaled_column_update: residual target required for alpha != 0");
    }
    const DenseMatrix hinv_mq = eliminated_inverse(state.h_inv, q);
    const DenseMatrix second = matmul(target->cross_corr, hinv_mq);
    for (std::size_t i = 0; i < d_out; ++i) {
      double* di = dw.row(i);
      const double* si = second.row(i);
      for (std::size_t j = 0; j < d_in; ++j) di[j] += alpha * si[j];
    }
  }

  // Enforce the coordinate constraint exactly; the residual term contributes
  // nothing at q (H⁻¹₋q has an exactly zero q-column) and the basic term
  // reproduces d_q only up to rounding.
  for (std::size_t i = 0; i < d_out; ++i) {
    dw.at(i, q) = q_values[i] - w_rows.at(i, q);
  }
  return dw;
}

SweepResult reconstruct_module(const DenseMatrix& weight, const QuantConfig& config,
                               const ReconMethod& method, HessianState& state,
                               ResidualTarget* target, const DenseMatrix& x_hat,
                               const SweepOptions& options) {
  config.validate();
  SweepResult result;
  result.objective_evals = 1;

  if (config.weight_bits == 16) {
    result.quantized_weight = weight;
    result.applied_dw = DenseMatrix(weight.rows(), weight.cols(), 0.0);
    return result;
  }
  if (method.kind == ReconMethod::Kind::Rtn) {
    result.quantized_weight = rtn_quantize_module(weight, config);
    result.applied_dw = subtract(result.quantized_weight, weight);
    return result;
  }
  if (method.kind == ReconMethod::Kind::Marr) {
    throw std::invalid_argument(
        "reconstruct_module: Marr must be resolved to a concrete alpha first");
  }
  if (method.needs_target() && target == nullptr) {
    throw std::invalid_argument("reconstruct_module: residual method requires a target");
  }
  if (!state.eliminated.empty()) {
    throw std::invalid_argument("reconstruct_module: state must be freshly inverted");
  }
  if (x_hat.rows() != weight.cols()) {
    throw std::invalid_argument("reconstruct_module: x_hat/weight dimension mismatch");
  }

  const double alpha = method.kind == ReconMethod::Kind::Gptq ? 0.0 : method.alpha;
  const std::size_t d_out = weight.rows();
  const std::size_t d_in = weight.cols();

  std::vector<ChannelQuantParams> grids(d_out);
  for (std::size_t i = 0; i < d_out; ++i) {
    grids[i] = calibrate_channel(std::span<const double>(weight.row(i), d_in),
                                 config.weight_bits, config.weight_symmetric);
  }

  // Raw (undamped) Gram matrix for the cross-correlation bookkeeping.
  DenseMatrix h_raw;
  if (target != nullptr) h_raw = accumulate_hessian({x_hat});

  // The sweep drives its updates from the effective target α·r − ΣΔwX̂, kept
  // separately from the caller's unscaled residual so α = 0 stays degenerate
  // (no residual arithmetic touches the weights at all).
  ResidualTarget effective;
  const bool use_residual = alpha != 0.0;
  if (use_residual) {
    effective.r = scale(target->r, alpha);
    effective.cross_corr = scale(target->cross_corr, alpha);
  }

  DenseMatrix w = weight;
  std::vector<double> q_values(d_out);
  for (std::size_t q : column_order(state, options.order)) {
    for (std::size_t i = 0; i < d_out; ++i) {
      q_values[i] = quantize_dequantize(w.at(i, q), grids[i]);
    }
    const DenseMatrix dw =
        scaled_column_update(w, q, q_values, state,
                             use_residual ? &effective : nullptr,
                             use_residual ? 1.0 : 0.0);

    if (options.keep_column_log) {
      double dqn = 0.0;
      double un = 0.0;
      for (std::size_t i = 0; i < d_out; ++i) {
        const double d = q_values[i] - w.at(i, q);
        dqn += d * d;
      }
      for (double v : dw.data()) un += v * v;
      result.per_column_log.push_back({q, std::sqrt(dqn), std::sqrt(un)});
    }

    for (std::size_t i = 0; i < d_out; ++i) {
      double* wi = w.row(i);
      const double* di = dw.row(i);
      for (std::size_t j = 0; j < d_in; ++j) wi[j] += di[j];
      w.at(i, q) = q_values[i];
    }

    if (target != nullptr) {
      const DenseMatrix dw_x = matmul(dw, x_hat);
      const DenseMatrix dw_h = matmul(dw, h_raw);
      target->r = subtract(target->r, dw_x);
      target->cross_corr = subtract(target->cross_corr, dw_h);
      if (use_residual) {
        effective.r = subtract(effective.r, dw_x);
        effective.cross_corr = subtract(effective.cross_corr, dw_h);
      }
    }
    eliminate_coordinate(state, q);

    if (!w.all_finite()) {
      throw std::runtime_error("reconstruct_module: non-finite weight after column " +
                               std::to_string(q) + "; Hessian too ill-conditioned");
    }
  }

  result.quantized_weight = std::move(w);
  result.applied_dw = subtract(result.quantized_weight, weight);
  return result;
}

}  // namespace marrq
