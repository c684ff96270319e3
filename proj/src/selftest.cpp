#include <cmath>
#include <cstdio>
#include <vector>

#include "marrq/oracle.hpp"
#include "marrq/pipeline.hpp"
#include "marrq/rng.hpp"

namespace marrq {

namespace {

DenseMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double s = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal() * s;
  return m;
}

struct PropertyResult {
  const char* name;
  bool ok;
  std::size_t instances;
  double worst;
};

PropertyResult check_constrained_ls(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  const double alphas[] = {0.0, 0.5, 1.0, 1.5};
  double worst = 0.0;
  bool ok = true;
  for (std::size_t it = 0; it < instances; ++it) {
    const std::size_t d_in = 3 + rng.next_u64() % 8;
    const std::size_t d_out = 1 + rng.next_u64() % 4;
    const std::size_t n = d_in + 4 + rng.next_u64() % 16;
    const DenseMatrix x_hat = random_matrix(rng, d_in, n);
    const DenseMatrix w = random_matrix(rng, d_out, d_in);
    const DenseMatrix r = random_matrix(rng, d_out, n);
    const double alpha = alphas[rng.next_u64() % 4];
    const std::size_t q = rng.next_u64() % d_in;

    const DenseMatrix h_raw = accumulate_hessian({x_hat});
    HessianState state = damp_and_invert(h_raw, 1e-12);
    ResidualTarget target;
    target.r = r;
    target.cross_corr = matmul(r, transpose(x_hat));

    std::vector<double> q_values(d_out);
    for (std::size_t i = 0; i < d_out; ++i) q_values[i] = w.at(i, q) + rng.normal() * 0.1;

    const DenseMatrix dw =
        scaled_column_update(w, q, q_values, state, alpha == 0.0 ? nullptr : &target, alpha);
    const DenseMatrix dw_oracle = oracle::constrained_ls(
        x_hat, scale(r, alpha), q, q_values, w, {}, state.damping_lambda);

    const DenseMatrix scaled_target = scale(r, alpha);
    const double j_impl = oracle::ls_objective(dw, x_hat, scaled_target);
    const double j_oracle = oracle::ls_objective(dw_oracle, x_hat, scaled_target);
    const double gap = (j_impl - j_oracle) / std::max(j_oracle, 1e-12);
    worst = std::max(worst, std::fabs(gap));
    if (!(std::fabs(gap) <= 1e-7)) ok = false;
    for (std::size_t i = 0; i < d_out; ++i) {
      if (dw.at(i, q) != q_values[i] - w.at(i, q)) ok = false;
    }
  }
  return {"constrained-ls-oracle", ok, instances, worst};
}

PropertyResult check_schur_elimination(std::uint64_t seed, std::size_t instances) {
  Rng rng(seed);
  double worst = 0.0;
  bool ok = true;
  for (std::size_t it = 0; it < instances; ++it) {
    const std::size_t d = 3 + rng.next_u64() % 10;
    const DenseMatrix a = random_matrix(rng, d, d + 3);
    const DenseMatrix h = accumulate_hessian({a});
    HessianState state = damp_and_invert(h, 1e-10);

    const std::size_t n_elim = 1 + rng.next_u64() % (d - 1);
    std::vector<std::size_t> victims;
    std::vector<char> used(d, 0);
    while (victims.size() < n_elim) {
      const std::size_t q = rng.next_u64() % d;
      if (!used[q]) {
        used[q] = 1;
        victims.push_back(q);
      }
    }
    for (std::size_t q : victims) eliminate_coordinate(state, q);

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < d; ++j) {
      if (!used[j]) keep.push_back(j);
    }
    const DenseMatrix ref = oracle::principal_submatrix_inverse(state.h, keep);
    const double rel = max_abs_diff(state.h_inv, ref) / std::max(max_abs(ref), 1e-300);
    worst = std::max(worst, rel);
    if (!(rel <= 1e-7)) ok = false;
  }
  return {"schur-elimination", ok, instances, worst};
}

PropertyResult check_reduction_identity(std::uint64_t seed) {
  const NetworkSpec net = generate_toy_network(3, {10, 12, 12, 8}, seed);
  const CalibrationSet calib = generate_calibration(10, 24, seed + 1);
  RunConfig cfg;
  cfg.quant.weight_bits = 3;
  cfg.quant.act_bits = 16;
  cfg.seed = seed;

  cfg.method = ReconMethod::gptq();
  const QuantizeOutcome a = quantize_network(net, calib, cfg);
  cfg.method = ReconMethod::residual(0.0);
  const QuantizeOutcome b = quantize_network(net, calib, cfg);

  bool ok = true;
  double worst = 0.0;
  for (std::size_t m = 0; m < net.modules.size(); ++m) {
    const auto& wa = a.quantized.modules[m].weight.data();
    const auto& wb = b.quantized.modules[m].weight.data();
    for (std::size_t i = 0; i < wa.size(); ++i) {
      if (wa[i] != wb[i]) {
        ok = false;
        worst = std::max(worst, std::fabs(wa[i] - wb[i]));
      }
    }
  }
  return {"reduction-identity", ok, 1, worst};
}

}  // namespace

bool run_selftest(const SelfTestOptions& options) {
  const PropertyResult results[] = {
      check_constrained_ls(options.seed, 60),
      check_schur_elimination(options.seed + 1, 60),
      check_reduction_identity(options.seed + 2),
  };
  bool all_ok = true;
  for (const PropertyResult& r : results) {
    std::printf("[%s] %s", r.ok ? "PASS" : "FAIL", r.name);
    if (options.verbose) {
      std::printf("  (instances=%zu, worst=%.3g)", r.instances, r.worst);
    }
    std::printf("\n");
    all_ok = all_ok && r.ok;
  }
  std::printf("%s\n", all_ok ? "selftest: all properties hold"
                             : "selftest: FAILURES detected");
  return all_ok;
}

}  // namespace marrq
