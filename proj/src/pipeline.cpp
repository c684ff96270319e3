#include "marrq/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace marrq {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ModuleProblem {
  CapturedFlows flows;
  DenseMatrix h_raw;
  ResidualTarget target;
};

double objective_for_weight(const ModuleSpec& module, const DenseMatrix& weight,
                            const CapturedFlows& flows) {
  ModuleSpec staged = module;
  staged.weight = weight;
  return module_objective(flows.z_fp, module_forward(staged, flows.x_hat));
}

}  // namespace

void RunConfig::validate() const {
  quant.validate();
  pid.validate();
  if (!(damping_percent > 0.0)) {
    throw std::invalid_argument("RunConfig: damping_percent must be > 0");
  }
}

QuantizeOutcome quantize_network(const NetworkSpec& net, const CalibrationSet& calib,
                                 const RunConfig& cfg) {
  net.validate();
  cfg.validate();

  QuantizeOutcome out;
  out.report.config_echo = cfg;
  out.quantized = net;

  SweepOptions sweep_opts;
  sweep_opts.order = cfg.column_order;

  std::vector<DenseMatrix> quantized_weights;
  quantized_weights.reserve(net.modules.size());

  for (std::size_t m = 0; m < net.modules.size(); ++m) {
    const ModuleSpec& module = net.modules[m];
    try {
      ModuleReport row;
      row.name = module.name;
      row.method = cfg.method.label();

      const CapturedFlows flows =
          capture_flows(net, quantized_weights, calib, cfg.quant, m);

      DenseMatrix final_weight;
      if (cfg.method.kind == ReconMethod::Kind::Rtn) {
        final_weight = rtn_quantize_module(module.weight, cfg.quant);
        row.objective_evals = 1;
      } else {
        const DenseMatrix h_raw = accumulate_hessian({flows.x_hat});
        const HessianState pristine_state = damp_and_invert(h_raw, cfg.damping_percent);
        row.damping_lambda = pristine_state.damping_lambda;
        const ResidualTarget pristine_target =
            compute_residual(module.weight, flows.x_fp, flows.x_hat);

        auto reconstruct_at = [&](const ReconMethod& method) {
          HessianState state = pristine_state;
          ResidualTarget target = pristine_target;
          return reconstruct_module(module.weight, cfg.quant, method, state,
                                    method.needs_target() ? &target : nullptr,
                                    flows.x_hat, sweep_opts);
        };

        if (cfg.method.kind == ReconMethod::Kind::Marr) {
          auto objective = [&](double alpha) {
            const SweepResult sr = reconstruct_at(ReconMethod::residual(alpha));
            return objective_for_weight(module, sr.quantized_weight, flows);
          };
          const AlphaEstimate est = estimate_alpha(objective, cfg.pid);
          // One guaranteed final reconstruction at α_final defines the
          // module state; it counts as one evaluation beyond the loop.
          const SweepResult sr = reconstruct_at(ReconMethod::residual(est.alpha_final));
          final_weight = sr.quantized_weight;
          row.alpha_final = est.alpha_final;
          row.objective_evals = est.trace.evaluations + 1;
          row.pid_termination = to_string(est.trace.termination);
          row.pid_steps = est.trace.steps.size();
          row.best_alpha = est.trace.best_alpha;
          row.best_objective = est.trace.best_objective;
          out.traces.push_back({module.name, est.trace});
        } else {
          const SweepResult sr = reconstruct_at(cfg.method);
          final_weight = sr.quantized_weight;
          row.objective_evals = 1;
          if (cfg.method.kind == ReconMethod::Kind::Residual) {
            row.alpha_final = cfg.method.alpha;
          } else {
            row.alpha_final = 0.0;  // gptq runs the α = 0 path
          }
        }
      }

      row.objective_j = objective_for_weight(module, final_weight, flows);
      out.report.per_module.push_back(std::move(row));
      out.report.total_objective_evals += out.report.per_module.back().objective_evals;
      out.quantized.modules[m].weight = final_weight;
      quantized_weights.push_back(std::move(final_weight));
    } catch (const std::exception& e) {
      throw std::runtime_error("quantize_network: module '" + module.name +
                               "' failed: " + e.what());
    }
  }

  const DenseMatrix fp_out = fp_activations(net, calib).back();
  const DenseMatrix q_out =
      quantized_network_output(net, quantized_weights, calib, cfg.quant);
  out.report.network_output_mse = frobenius_mse(fp_out, q_out);
  return out;
}

std::vector<AlphaSweepRow> alpha_sweep(const NetworkSpec& net,
                                       const CalibrationSet& calib,
                                       const RunConfig& cfg,
                                       const std::vector<double>& alphas) {
  if (alphas.empty()) throw std::invalid_argument("alpha_sweep: no alphas");
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) {
    RunConfig run = cfg;
    run.method = ReconMethod::residual(a);
    const QuantizeOutcome qo = quantize_network(net, calib, run);
    AlphaSweepRow row;
    row.alpha = a;
    for (const ModuleReport& mr : qo.report.per_module) {
      row.per_module_j.push_back(mr.objective_j);
    }
    row.network_output_mse = qo.report.network_output_mse;
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* to_string(ColumnOrder order) {
  return order == ColumnOrder::DescendingDiag ? "descending-diag" : "natural";
}

namespace {
ColumnOrder column_order_from_string(const std::string& s) {
  if (s == "natural") return ColumnOrder::Natural;
  if (s == "descending-diag") return ColumnOrder::DescendingDiag;
  throw std::invalid_argument("unknown column order: " + s);
}
}  // namespace

ReconMethod method_from_label(const std::string& label) {
  if (label == "rtn") return ReconMethod::rtn();
  if (label == "gptq") return ReconMethod::gptq();
  if (label == "gptaq") return ReconMethod::residual(1.0);
  if (label == "marr") return ReconMethod::marr();
  if (label.rfind("residual:", 0) == 0) {
    const std::string num = label.substr(9);
    std::size_t pos = 0;
    double a = 0.0;
    try {
      a = std::stod(num, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad residual coefficient: " + label);
    }
    if (pos != num.size() || !std::isfinite(a)) {
      throw std::invalid_argument("bad residual coefficient: " + label);
    }
    return ReconMethod::residual(a);
  }
  throw std::invalid_argument("unknown method: " + label);
}

std::string emit_report(const ReconReport& report,
                        const std::vector<NamedPidTrace>& traces, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "module,t,alpha,J,g,d,delta_alpha\n";
    for (const NamedPidTrace& nt : traces) {
      for (const PidStep& s : nt.trace.steps) {
        out << nt.module << ',' << s.t << ',' << fmt_double(s.alpha) << ','
            << fmt_double(s.objective) << ',' << fmt_double(s.g) << ','
            << fmt_double(s.d) << ',' << fmt_double(s.delta_alpha) << '\n';
      }
    }
    return out.str();
  }

  for (const ModuleReport& m : report.per_module) {
    nlohmann::ordered_json j;
    j["module"] = m.name;
    j["method"] = m.method;
    if (m.alpha_final) {
      j["alpha_final"] = *m.alpha_final;
    } else {
      j["alpha_final"] = nullptr;
    }
    j["objective_j"] = m.objective_j;
    j["objective_evals"] = m.objective_evals;
    if (m.damping_lambda) j["damping_lambda"] = *m.damping_lambda;
    if (m.pid_termination) j["pid_termination"] = *m.pid_termination;
    if (m.pid_steps) j["pid_steps"] = *m.pid_steps;
    if (m.best_alpha) j["best_alpha"] = *m.best_alpha;
    if (m.best_objective) j["best_objective"] = *m.best_objective;
    out << j.dump() << '\n';
  }

  const RunConfig& cfg = report.config_echo;
  nlohmann::ordered_json s;
  s["summary"] = true;
  s["network_output_mse"] = report.network_output_mse;
  s["total_objective_evals"] = report.total_objective_evals;
  nlohmann::ordered_json c;
  c["method"] = cfg.method.label();
  c["wbits"] = cfg.quant.weight_bits;
  c["abits"] = cfg.quant.act_bits;
  c["weight_symmetric"] = cfg.quant.weight_symmetric;
  c["act_symmetric"] = cfg.quant.act_symmetric;
  c["damping_percent"] = cfg.damping_percent;
  c["seed"] = cfg.seed;
  c["column_order"] = to_string(cfg.column_order);
  nlohmann::ordered_json p;
  p["max_steps"] = cfg.pid.max_steps;
  p["kp"] = cfg.pid.kp;
  p["ki"] = cfg.pid.ki;
  p["kd"] = cfg.pid.kd;
  p["beta"] = cfg.pid.beta;
  p["eps_j"] = cfg.pid.eps_j;
  p["eps_alpha"] = cfg.pid.eps_alpha;
  p["tau"] = cfg.pid.tau;
  p["alpha_init"] = {cfg.pid.alpha_init_pair.first, cfg.pid.alpha_init_pair.second};
  c["pid"] = p;
  s["config"] = c;
  out << s.dump() << '\n';
  return out.str();
}

ReconReport parse_report(const std::string& bytes) {
  ReconReport report;
  std::istringstream in(bytes);
  std::string line;
  bool saw_summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (j.value("summary", false)) {
      report.network_output_mse = j.at("network_output_mse").get<double>();
      report.total_objective_evals = j.at("total_objective_evals").get<std::size_t>();
      const auto& c = j.at("config");
      RunConfig cfg;
      cfg.method = method_from_label(c.at("method").get<std::string>());
      cfg.quant.weight_bits = c.at("wbits").get<int>();
      cfg.quant.act_bits = c.at("abits").get<int>();
      cfg.quant.weight_symmetric = c.at("weight_symmetric").get<bool>();
      cfg.quant.act_symmetric = c.at("act_symmetric").get<bool>();
      cfg.damping_percent = c.at("damping_percent").get<double>();
      cfg.seed = c.at("seed").get<std::uint64_t>();
      cfg.column_order = column_order_from_string(c.at("column_order").get<std::string>());
      const auto& p = c.at("pid");
      cfg.pid.max_steps = p.at("max_steps").get<int>();
      cfg.pid.kp = p.at("kp").get<double>();
      cfg.pid.ki = p.at("ki").get<double>();
      cfg.pid.kd = p.at("kd").get<double>();
      cfg.pid.beta = p.at("beta").get<double>();
      cfg.pid.eps_j = p.at("eps_j").get<double>();
      cfg.pid.eps_alpha = p.at("eps_alpha").get<double>();
      cfg.pid.tau = p.at("tau").get<double>();
      cfg.pid.alpha_init_pair = {p.at("alpha_init").at(0).get<double>(),
                                 p.at("alpha_init").at(1).get<double>()};
      report.config_echo = cfg;
      saw_summary = true;
      continue;
    }
    ModuleReport m;
    m.name = j.at("module").get<std::string>();
    m.method = j.at("method").get<std::string>();
    if (!j.at("alpha_final").is_null()) {
      m.alpha_final = j.at("alpha_final").get<double>();
    }
    m.objective_j = j.at("objective_j").get<double>();
    m.objective_evals = j.at("objective_evals").get<std::size_t>();
    if (j.contains("damping_lambda")) {
      m.damping_lambda = j.at("damping_lambda").get<double>();
    }
    if (j.contains("pid_termination")) {
      m.pid_termination = j.at("pid_termination").get<std::string>();
    }
    if (j.contains("pid_steps")) m.pid_steps = j.at("pid_steps").get<std::size_t>();
    if (j.contains("best_alpha")) m.best_alpha = j.at("best_alpha").get<double>();
    if (j.contains("best_objective")) {
      m.best_objective = j.at("best_objective").get<double>();
    }
    report.per_module.push_back(std::move(m));
  }
  if (!saw_summary) {
    throw std::invalid_argument("parse_report: missing summary line");
  }
  return report;
}

}  // namespace marrq
