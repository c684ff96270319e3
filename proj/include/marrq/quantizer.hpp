#ifndef MARRQ_QUANTIZER_HPP
#define MARRQ_QUANTIZER_HPP

#include <cstdint>
#include <span>

#include "marrq/matrix.hpp"

namespace marrq {

/// Bit-width settings. 16 bits means the corresponding tensor is left in
/// full precision (pass-through).
struct QuantConfig {
  int weight_bits = 4;
  int act_bits = 16;
  bool weight_symmetric = true;
  bool act_symmetric = false;

  void validate() const;
};

/// Uniform affine grid for one weight channel or one activation token.
/// Every representable value is scale * (k - zero_point), k in [qmin, qmax].
struct ChannelQuantParams {
  double scale = 1.0;
  int zero_point = 0;
  int qmin = 0;
  int qmax = 0;
};

/// Min-max grid calibration. Symmetric mode uses the signed restricted grid
/// {-(2^(b-1)-1), ..., 2^(b-1)-1}; asymmetric mode uses the unsigned grid
/// [0, 2^b - 1] over a range extended to include zero, which keeps the zero
/// point inside the grid and makes constant channels exactly representable.
/// Zero-range input falls back to scale = 1e-8.
ChannelQuantParams calibrate_channel(std::span<const double> values, int bits,
                                     bool symmetric);

/// Round to the grid (half away from zero), clamp, map back to real values.
double quantize_dequantize(double value, const ChannelQuantParams& params);
void quantize_dequantize(std::span<const double> values,
                         const ChannelQuantParams& params,
                         std::span<double> out);

/// Round-to-nearest baseline: each output channel (row) calibrated and
/// quantized independently, no compensation. 16-bit returns the input as is.
DenseMatrix rtn_quantize_module(const DenseMatrix& weight, const QuantConfig& config);

/// Dynamic per-token activation quantization: each column calibrated at
/// runtime. act_bits == 16 returns the input unchanged.
DenseMatrix quantize_activations_per_token(const DenseMatrix& x, int act_bits,
                                           bool symmetric = false);

}  // namespace marrq

#endif
