#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marrq/model_io.hpp"
#include "marrq/oracle.hpp"
#include "marrq/pipeline.hpp"

namespace {

using namespace marrq;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MARRQ_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::strtoull(v, nullptr, 10);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_alphas(const std::string& csv) {
  std::vector<double> alphas;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      std::size_t pos = 0;
      double a = 0.0;
      try {
        a = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad alpha value: " + tok);
      }
      if (pos != tok.size() || !std::isfinite(a)) {
        throw std::invalid_argument("bad alpha value: " + tok);
      }
      alphas.push_back(a);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (alphas.empty()) throw std::invalid_argument("empty alpha list");
  std::vector<double> unique;
  for (double a : alphas) {
    bool seen = false;
    for (double u : unique) seen = seen || u == a;
    if (seen) {
      std::fprintf(stderr, "warning: duplicate alpha %s ignored\n", fmt_double(a).c_str());
    } else {
      unique.push_back(a);
    }
  }
  return unique;
}

const CLI::Validator kMethodValidator(
    [](std::string& s) -> std::string {
      try {
        method_from_label(s);
        return {};
      } catch (const std::exception& e) {
        return e.what();
      }
    },
    "METHOD");

const CLI::Validator kAlphasValidator(
    [](std::string& s) -> std::string {
      try {
        parse_alphas(s);
        return {};
      } catch (const std::exception& e) {
        return e.what();
      }
    },
    "ALPHAS");

struct CommonFlags {
  std::string model_path;
  std::string calib_path;
  int wbits = 4;
  int abits = 16;
  std::uint64_t seed = 0;
  double damping = 0.01;
  std::string order = "natural";

  void add_to(CLI::App* cmd, bool io_required = true) {
    cmd->add_option("--model", model_path, "model manifest (.json)")->required(io_required);
    cmd->add_option("--calib", calib_path, "calibration manifest (.json)")->required(io_required);
    cmd->add_option("--wbits", wbits, "weight bits {2,3,4,8,16}")
        ->check(CLI::IsMember({2, 3, 4, 8, 16}));
    cmd->add_option("--abits", abits, "activation bits {3,4,16}")
        ->check(CLI::IsMember({3, 4, 16}));
    cmd->add_option("--seed", seed, "run seed (MARRQ_SEED overrides)");
    cmd->add_option("--damping", damping, "Hessian damping as a fraction of mean diag")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--order", order, "column order: natural | descending-diag")
        ->check(CLI::IsMember({"natural", "descending-diag"}));
  }

  RunConfig to_run_config() const {
    RunConfig cfg;
    cfg.quant.weight_bits = wbits;
    cfg.quant.act_bits = abits;
    cfg.damping_percent = damping;
    cfg.seed = env_seed().value_or(seed);
    cfg.column_order = order == "descending-diag" ? ColumnOrder::DescendingDiag
                                                  : ColumnOrder::Natural;
    return cfg;
  }
};

int run_quantize(const CommonFlags& flags, const std::string& method_label,
                 int max_steps, const std::string& out_path,
                 std::string report_path, std::string trace_path) {
  RunConfig cfg = flags.to_run_config();
  cfg.method = method_from_label(method_label);
  cfg.pid.max_steps = max_steps;

  const NetworkSpec net = load_network(flags.model_path);
  const CalibrationSet calib = load_calibration(flags.calib_path);
  const QuantizeOutcome outcome = quantize_network(net, calib, cfg);

  save_network(outcome.quantized, out_path);
  if (report_path.empty()) {
    report_path = std::filesystem::path(out_path).replace_extension(".report.jsonl").string();
  }
  write_file(report_path, emit_report(outcome.report, outcome.traces,
                                      ReportFormat::JsonLines));
  if (!trace_path.empty()) {
    write_file(trace_path,
               emit_report(outcome.report, outcome.traces, ReportFormat::Csv));
  }
  std::printf("quantized %zu modules  method=%s  network_output_mse=%s  evals=%zu\n",
              outcome.report.per_module.size(), cfg.method.label().c_str(),
              fmt_double(outcome.report.network_output_mse).c_str(),
              outcome.report.total_objective_evals);
  return 0;
}

int run_sweep(const CommonFlags& flags, const std::string& alphas_csv,
              const std::string& out_path) {
  const std::vector<double> alphas = parse_alphas(alphas_csv);
  RunConfig cfg = flags.to_run_config();

  const NetworkSpec net = load_network(flags.model_path);
  const CalibrationSet calib = load_calibration(flags.calib_path);
  const std::vector<AlphaSweepRow> rows = alpha_sweep(net, calib, cfg, alphas);

  std::string csv = "alpha,module,J\n";
  for (const AlphaSweepRow& row : rows) {
    for (std::size_t m = 0; m < row.per_module_j.size(); ++m) {
      csv += fmt_double(row.alpha) + "," + net.modules[m].name + "," +
             fmt_double(row.per_module_j[m]) + "\n";
    }
    csv += fmt_double(row.alpha) + ",network," + fmt_double(row.network_output_mse) + "\n";
  }
  write_file(out_path, csv);
  std::printf("swept %zu alphas over %zu modules -> %s\n", rows.size(),
              net.modules.size(), out_path.c_str());
  return 0;
}

int run_trace(const CommonFlags& flags, int max_steps, const std::string& out_path) {
  RunConfig cfg = flags.to_run_config();
  cfg.method = ReconMethod::marr();
  cfg.pid.max_steps = max_steps;

  const NetworkSpec net = load_network(flags.model_path);
  const CalibrationSet calib = load_calibration(flags.calib_path);
  const QuantizeOutcome outcome = quantize_network(net, calib, cfg);
  write_file(out_path, emit_report(outcome.report, outcome.traces, ReportFormat::Csv));

  std::size_t early = 0;
  for (const NamedPidTrace& t : outcome.traces) {
    if (t.trace.termination == PidTermination::EarlyStop) ++early;
  }
  std::printf("traced %zu modules (max_steps=%d, %zu early-stopped) -> %s\n",
              outcome.traces.size(), max_steps, early, out_path.c_str());
  return 0;
}

int run_gen(std::size_t depth, const std::string& widths_csv, std::uint64_t seed,
            std::size_t samples, const std::string& model_out,
            const std::string& calib_out) {
  std::vector<std::size_t> widths;
  std::size_t start = 0;
  while (start <= widths_csv.size()) {
    const std::size_t comma = widths_csv.find(',', start);
    const std::string tok = widths_csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) widths.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  const std::uint64_t effective_seed = env_seed().value_or(seed);
  const NetworkSpec net = generate_toy_network(depth, widths, effective_seed);
  save_network(net, model_out);
  if (!calib_out.empty()) {
    const CalibrationSet calib =
        generate_calibration(net.input_dim, samples, effective_seed + 1);
    save_calibration(calib, calib_out);
  }
  std::printf("generated %zu-module network (seed=%llu) -> %s\n", net.modules.size(),
              static_cast<unsigned long long>(effective_seed), model_out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marrq: reconstruction-based post-training quantization workbench"};
  app.require_subcommand(1);

  // quantize
  CommonFlags qf;
  std::string method = "marr";
  std::string out_path, report_path, trace_path;
  int max_steps = 3;
  CLI::App* quantize = app.add_subcommand("quantize", "quantize a network");
  qf.add_to(quantize);
  quantize->add_option("--method", method,
                       "rtn | gptq | gptaq | marr | residual:<alpha>")
      ->check(kMethodValidator);
  quantize->add_option("--out", out_path, "output model manifest (.json)")->required();
  quantize->add_option("--report", report_path, "report path (.jsonl)");
  quantize->add_option("--trace", trace_path, "trajectory CSV path (marr only)");
  quantize->add_option("--max-steps", max_steps, "feedback update steps T")
      ->check(CLI::PositiveNumber);

  // sweep
  CommonFlags sf;
  std::string alphas_csv;
  std::string sweep_out = "sweep.csv";
  CLI::App* sweep = app.add_subcommand("sweep", "fixed-alpha sweep");
  sf.add_to(sweep);
  sweep->add_option("--alphas", alphas_csv, "comma-separated alpha list")
      ->required()
      ->check(kAlphasValidator);
  sweep->add_option("--out", sweep_out, "output CSV path");

  // trace
  CommonFlags tf;
  int trace_steps = 10;
  std::string trace_out = "trace.csv";
  CLI::App* trace = app.add_subcommand("trace", "record marr update trajectories");
  tf.add_to(trace);
  trace->add_option("--max-steps", trace_steps, "feedback update steps T")
      ->check(CLI::PositiveNumber);
  trace->add_option("--out", trace_out, "output CSV path");

  // gen
  std::size_t gen_depth = 6;
  std::string gen_widths = "16,24,24,20,20,16,12";
  std::uint64_t gen_seed = 7;
  std::size_t gen_samples = 256;
  std::string gen_model_out = "demo.json";
  std::string gen_calib_out = "demo.calib.json";
  CLI::App* gen = app.add_subcommand("gen", "generate a seeded toy network");
  gen->add_option("--depth", gen_depth, "number of linear modules");
  gen->add_option("--widths", gen_widths, "comma-separated dims (depth+1 entries)");
  gen->add_option("--seed", gen_seed, "generator seed (MARRQ_SEED overrides)");
  gen->add_option("--samples", gen_samples, "calibration sample count");
  gen->add_option("--out", gen_model_out, "model manifest path");
  gen->add_option("--calib-out", gen_calib_out, "calibration manifest path (empty to skip)");

  // selftest
  bool st_verbose = false;
  CLI::App* selftest = app.add_subcommand("selftest", "run the oracle-equivalence suite");
  selftest->add_flag("--verbose", st_verbose, "print per-property instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (quantize->parsed()) {
      return run_quantize(qf, method, max_steps, out_path, report_path, trace_path);
    }
    if (sweep->parsed()) return run_sweep(sf, alphas_csv, sweep_out);
    if (trace->parsed()) return run_trace(tf, trace_steps, trace_out);
    if (gen->parsed()) {
      return run_gen(gen_depth, gen_widths, gen_seed, gen_samples, gen_model_out,
                     gen_calib_out);
    }
    if (selftest->parsed()) {
      SelfTestOptions opts;
      opts.verbose = st_verbose;
      return run_selftest(opts) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
