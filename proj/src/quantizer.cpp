#include "marrq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marrq {

namespace {
constexpr double kDegenerateScale = 1e-8;

bool valid_weight_bits(int b) {
  return b == 2 || b == 3 || b == 4 || b == 8 || b == 16;
}
bool valid_act_bits(int b) { return b == 3 || b == 4 || b == 16; }
}  // namespace

void QuantConfig::validate() const {
  if (!valid_weight_bits(weight_bits)) {
    throw std::invalid_argument("QuantConfig: weight_bits must be in {2,3,4,8,16}");
  }
  if (!valid_act_bits(act_bits)) {
    throw std::invalid_argument("QuantConfig: act_bits must be in {3,4,16}");
  }
}

ChannelQuantParams calibrate_channel(std::span<const double> values, int bits,
                                     bool symmetric) {
  if (values.empty()) {
    throw std::invalid_argument("calibrate_channel: empty input");
  }
  if (bits < 2) {
    throw std::invalid_argument("calibrate_channel: bits must be >= 2");
  }
  double lo = values[0];
  double hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("calibrate_channel: non-finite value");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  ChannelQuantParams p;
  if (symmetric) {
    p.qmax = (1 << (bits - 1)) - 1;
    p.qmin = -p.qmax;
    p.zero_point = 0;
    const double m = std::max(std::fabs(lo), std::fabs(hi));
    p.scale = m > 0.0 ? m / p.qmax : kDegenerateScale;
  } else {
    p.qmin = 0;
    p.qmax = (1 << bits) - 1;
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    const double range = hi - lo;
    if (range > 0.0) {
      p.scale = range / p.qmax;
      const double zp = std::round(-lo / p.scale);
      p.zero_point = static_cast<int>(
          std::clamp(zp, static_cast<double>(p.qmin), static_cast<double>(p.qmax)));
    } else {
      p.scale = kDegenerateScale;
      p.zero_point = 0;
    }
  }
  return p;
}

double quantize_dequantize(double value, const ChannelQuantParams& params) {
  double k = std::round(value / params.scale + params.zero_point);
  k = std::clamp(k, static_cast<double>(params.qmin), static_cast<double>(params.qmax));
  return params.scale * (k - params.zero_point);
}

void quantize_dequantize(std::span<const double> values,
                         const ChannelQuantParams& params,
                         std::span<double> out) {
  if (values.size() != out.size()) {
    throw std::invalid_argument("quantize_dequantize: size mismatch");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = quantize_dequantize(values[i], params);
  }
}

DenseMatrix rtn_quantize_module(const DenseMatrix& weight, const QuantConfig& config) {
  config.validate();
  if (config.weight_bits == 16) return weight;
  DenseMatrix out(weight.rows(), weight.cols());
  for (std::size_t i = 0; i < weight.rows(); ++i) {
    std::span<const double> row(weight.row(i), weight.cols());
    const ChannelQuantParams p =
        calibrate_channel(row, config.weight_bits, config.weight_symmetric);
    quantize_dequantize(row, p, std::span<double>(out.row(i), out.cols()));
  }
  return out;
}

DenseMatrix quantize_activations_per_token(const DenseMatrix& x, int act_bits,
                                           bool symmetric) {
  if (act_bits == 16) return x;
  if (!valid_act_bits(act_bits)) {
    throw std::invalid_argument("quantize_activations_per_token: bad act_bits");
  }
  DenseMatrix out(x.rows(), x.cols());
  std::vector<double> col(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t i = 0; i < x.rows(); ++i) col[i] = x.at(i, j);
    const ChannelQuantParams p = calibrate_channel(col, act_bits, symmetric);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out.at(i, j) = quantize_dequantize(col[i], p);
    }
  }
  return out;
}

}  // namespace marrq
