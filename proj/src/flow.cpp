#include "marrq/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "marrq/rng.hpp"

namespace marrq {

void NetworkSpec::validate() const {
  if (modules.empty()) throw std::invalid_argument("NetworkSpec: no modules");
  std::size_t dim = input_dim;
  for (const ModuleSpec& m : modules) {
    if (m.d_in() != dim) {
      throw std::invalid_argument("NetworkSpec: dimension chain broken at " + m.name);
    }
    if (!m.weight.all_finite()) {
      throw std::invalid_argument("NetworkSpec: non-finite weight in " + m.name);
    }
    if (m.bias && m.bias->size() != m.d_out()) {
      throw std::invalid_argument("NetworkSpec: bias length mismatch in " + m.name);
    }
    dim = m.d_out();
  }
}

NetworkSpec generate_toy_network(std::size_t depth,
                                 const std::vector<std::size_t>& widths,
                                 std::uint64_t seed) {
  if (widths.size() != depth + 1) {
    throw std::invalid_argument("generate_toy_network: widths must list depth+1 dims");
  }
  Rng rng(seed);
  NetworkSpec net;
  net.input_dim = widths[0];
  for (std::size_t k = 0; k < depth; ++k) {
    ModuleSpec m;
    m.name = "fc" + std::to_string(k);
    const std::size_t d_in = widths[k];
    const std::size_t d_out = widths[k + 1];
    const double s = 1.0 / std::sqrt(static_cast<double>(d_in));
    m.weight = DenseMatrix(d_out, d_in);
    for (double& v : m.weight.data()) v = rng.normal() * s;
    m.activation_after = (k + 1 < depth) ? Activation::Relu : Activation::None;
    net.modules.push_back(std::move(m));
  }
  net.validate();
  return net;
}

CalibrationSet generate_calibration(std::size_t input_dim, std::size_t n_samples,
                                    std::uint64_t seed) {
  if (n_samples == 0) {
    throw std::invalid_argument("generate_calibration: need at least one sample");
  }
  Rng rng(seed);
  CalibrationSet calib;
  calib.seed = seed;
  calib.inputs = DenseMatrix(input_dim, n_samples);
  for (double& v : calib.inputs.data()) v = rng.normal();
  return calib;
}

DenseMatrix module_forward(const ModuleSpec& m, const DenseMatrix& x) {
  DenseMatrix z = matmul(m.weight, x);
  if (m.bias) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const double b = (*m.bias)[i];
      double* zi = z.row(i);
      for (std::size_t j = 0; j < z.cols(); ++j) zi[j] += b;
    }
  }
  return z;
}

DenseMatrix apply_activation(Activation act, const DenseMatrix& x) {
  if (act == Activation::None) return x;
  DenseMatrix out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

std::vector<DenseMatrix> fp_activations(const NetworkSpec& net,
                                        const CalibrationSet& calib) {
  net.validate();
  if (calib.inputs.rows() != net.input_dim) {
    throw std::invalid_argument("fp_activations: calibration dimension mismatch");
  }
  std::vector<DenseMatrix> acts;
  acts.reserve(net.modules.size() + 1);
  acts.push_back(calib.inputs);
  for (const ModuleSpec& m : net.modules) {
    acts.push_back(apply_activation(m.activation_after, module_forward(m, acts.back())));
  }
  return acts;
}

namespace {
// Input reaching `module_index` along the quantized flow; every module input
// (including the first) is per-token quantized when act_bits < 16.
DenseMatrix quant_flow_input(const NetworkSpec& net,
                             const std::vector<DenseMatrix>& quantized_weights,
                             const CalibrationSet& calib, const QuantConfig& config,
                             std::size_t module_index) {
  DenseMatrix a = calib.inputs;
  for (std::size_t k = 0; k < module_index; ++k) {
    const DenseMatrix qin =
        quantize_activations_per_token(a, config.act_bits, config.act_symmetric);
    ModuleSpec staged = net.modules[k];
    staged.weight = quantized_weights[k];
    a = apply_activation(staged.activation_after, module_forward(staged, qin));
  }
  return quantize_activations_per_token(a, config.act_bits, config.act_symmetric);
}
}  // namespace

CapturedFlows capture_flows(const NetworkSpec& net,
                            const std::vector<DenseMatrix>& quantized_prefix,
                            const CalibrationSet& calib, const QuantConfig& config,
                            std::size_t module_index) {
  net.validate();
  config.validate();
  if (module_index >= net.modules.size()) {
    throw std::invalid_argument("capture_flows: module index out of range");
  }
  if (quantized_prefix.size() < module_index) {
    throw std::invalid_argument("capture_flows: quantized prefix too short");
  }

  CapturedFlows flows;
  DenseMatrix a = calib.inputs;
  for (std::size_t k = 0; k < module_index; ++k) {
    a = apply_activation(net.modules[k].activation_after,
                         module_forward(net.modules[k], a));
  }
  flows.x_fp = std::move(a);
  flows.x_hat = quant_flow_input(net, quantized_prefix, calib, config, module_index);
  flows.z_fp = module_forward(net.modules[module_index], flows.x_fp);
  return flows;
}

DenseMatrix quantized_network_output(const NetworkSpec& net,
                                     const std::vector<DenseMatrix>& quantized_weights,
                                     const CalibrationSet& calib,
                                     const QuantConfig& config) {
  if (quantized_weights.size() != net.modules.size()) {
    throw std::invalid_argument("quantized_network_output: weight count mismatch");
  }
  DenseMatrix a = calib.inputs;
  for (std::size_t k = 0; k < net.modules.size(); ++k) {
    const DenseMatrix qin =
        quantize_activations_per_token(a, config.act_bits, config.act_symmetric);
    ModuleSpec staged = net.modules[k];
    staged.weight = quantized_weights[k];
    a = apply_activation(staged.activation_after, module_forward(staged, qin));
  }
  return a;
}

const char* to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "none";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "none") return Activation::None;
  throw std::invalid_argument("unknown activation: " + s);
}

}  // namespace marrq
