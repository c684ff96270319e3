#ifndef MARRQ_PIPELINE_HPP
#define MARRQ_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "marrq/flow.hpp"
#include "marrq/pid.hpp"
#include "marrq/reconstruct.hpp"

namespace marrq {

struct RunConfig {
  ReconMethod method = ReconMethod::gptq();
  QuantConfig quant;
  PidConfig pid;
  double damping_percent = 0.01;  // λ = damping_percent × mean(diag H)
  std::uint64_t seed = 0;
  ColumnOrder column_order = ColumnOrder::Natural;

  void validate() const;
};

struct ModuleReport {
  std::string name;
  std::string method;
  std::optional<double> alpha_final;
  double objective_j = 0.0;
  std::size_t objective_evals = 0;  // reconstruction sweeps spent on the module
  std::optional<double> damping_lambda;  // λ actually applied to this module's H
  // Feedback-loop bookkeeping, present for marr runs only.
  std::optional<std::string> pid_termination;
  std::optional<std::size_t> pid_steps;
  std::optional<double> best_alpha;
  std::optional<double> best_objective;
};

struct ReconReport {
  std::vector<ModuleReport> per_module;
  double network_output_mse = 0.0;
  std::size_t total_objective_evals = 0;
  RunConfig config_echo;
};

struct NamedPidTrace {
  std::string module;
  PidTrace trace;
};

struct QuantizeOutcome {
  NetworkSpec quantized;
  ReconReport report;
  std::vector<NamedPidTrace> traces;  // one per module for marr runs
};

/// Quantize every module in order: capture flows, build the damped Hessian
/// from X̂, compute the residual target, reconstruct per the configured
/// method. For marr, the per-module coefficient comes from the feedback loop,
/// each evaluation reconstructing a pristine copy; the module is left in the
/// state of one final reconstruction at α_final (counted as one extra
/// evaluation).
QuantizeOutcome quantize_network(const NetworkSpec& net, const CalibrationSet& calib,
                                 const RunConfig& cfg);

struct AlphaSweepRow {
  double alpha = 0.0;
  std::vector<double> per_module_j;
  double network_output_mse = 0.0;
};

/// One full quantize_network run per α with method Residual(α).
std::vector<AlphaSweepRow> alpha_sweep(const NetworkSpec& net,
                                       const CalibrationSet& calib,
                                       const RunConfig& cfg,
                                       const std::vector<double>& alphas);

enum class ReportFormat { JsonLines, Csv };

/// JsonLines: one object per module plus one summary object. Csv: the
/// trajectory table, one row per feedback step with columns
/// module,t,alpha,J,g,d,delta_alpha.
std::string emit_report(const ReconReport& report,
                        const std::vector<NamedPidTrace>& traces, ReportFormat format);

/// Inverse of emit_report's JsonLines serialization.
ReconReport parse_report(const std::string& bytes);

ReconMethod method_from_label(const std::string& label);
const char* to_string(ColumnOrder order);

}  // namespace marrq

#endif
