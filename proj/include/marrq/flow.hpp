#ifndef MARRQ_FLOW_HPP
#define MARRQ_FLOW_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marrq/matrix.hpp"
#include "marrq/quantizer.hpp"

namespace marrq {

enum class Activation { None, Relu };

struct ModuleSpec {
  std::string name;
  DenseMatrix weight;  // d_out × d_in
  std::optional<std::vector<double>> bias;
  Activation activation_after = Activation::None;

  std::size_t d_out() const { return weight.rows(); }
  std::size_t d_in() const { return weight.cols(); }
};

struct NetworkSpec {
  std::vector<ModuleSpec> modules;
  std::size_t input_dim = 0;

  void validate() const;
};

struct CalibrationSet {
  DenseMatrix inputs;  // input_dim × n_samples
  std::uint64_t seed = 0;
};

/// Seeded MLP chain: module k maps widths[k] → widths[k+1], weights drawn
/// from N(0, 1)/sqrt(d_in), ReLU between modules, linear final output.
NetworkSpec generate_toy_network(std::size_t depth,
                                 const std::vector<std::size_t>& widths,
                                 std::uint64_t seed);

/// Seeded standard-normal calibration inputs.
CalibrationSet generate_calibration(std::size_t input_dim, std::size_t n_samples,
                                    std::uint64_t seed);

/// w·x (+ bias broadcast over columns), no activation.
DenseMatrix module_forward(const ModuleSpec& m, const DenseMatrix& x);
DenseMatrix apply_activation(Activation act, const DenseMatrix& x);

/// Activations of the all-FP network: entry k is the input reaching module k,
/// entry modules.size() is the final network output. Independent of any
/// quantization settings.
std::vector<DenseMatrix> fp_activations(const NetworkSpec& net,
                                        const CalibrationSet& calib);

struct CapturedFlows {
  DenseMatrix x_fp;   // input to the module through the FP network
  DenseMatrix x_hat;  // input through the quantized prefix, activation-quantized
  DenseMatrix z_fp;   // FP module output w·x_fp (+bias)
};

/// Dual-flow capture for one module. quantized_prefix holds the final weights
/// of modules 0..module_index-1; the quantized flow applies per-token
/// activation quantization (per config.act_bits) to every module input.
CapturedFlows capture_flows(const NetworkSpec& net,
                            const std::vector<DenseMatrix>& quantized_prefix,
                            const CalibrationSet& calib, const QuantConfig& config,
                            std::size_t module_index);

/// Forward pass of the whole quantized network (weights replaced by
/// `quantized_weights`, module inputs activation-quantized per config).
DenseMatrix quantized_network_output(const NetworkSpec& net,
                                     const std::vector<DenseMatrix>& quantized_weights,
                                     const CalibrationSet& calib,
                                     const QuantConfig& config);

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

}  // namespace marrq

#endif
