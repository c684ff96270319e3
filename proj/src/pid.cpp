#include "marrq/pid.hpp"

#include <cmath>
#include <stdexcept>

namespace marrq {

void PidConfig::validate() const {
  if (max_steps < 1) throw std::invalid_argument("PidConfig: max_steps must be >= 1");
  for (double v : {kp, ki, kd, beta, eps_j, eps_alpha, tau, alpha_init_pair.first,
                   alpha_init_pair.second}) {
    if (!std::isfinite(v)) throw std::invalid_argument("PidConfig: non-finite field");
  }
}

std::pair<double, double> deviation_signal(double j_prev, double j_prev2, double j0,
                                           double a_prev, double a_prev2,
                                           const PidConfig& cfg) {
  const double g =
      ((j_prev - j_prev2) / (j0 + cfg.eps_j)) / (a_prev - a_prev2 + cfg.eps_alpha);
  double d = std::tanh(-cfg.beta * g);
  // IEEE tanh rounds to ±1 for |x| ≳ 19; hold the strict open-interval bound
  // at the representable boundary.
  if (d >= 1.0) d = std::nextafter(1.0, 0.0);
  if (d <= -1.0) d = std::nextafter(-1.0, 0.0);
  return {g, d};
}

double pid_increment(double d_t, double d_t1, double d_t2, const PidConfig& cfg) {
  return cfg.kp * (d_t - d_t1) + cfg.ki * d_t + cfg.kd * (d_t - 2.0 * d_t1 + d_t2);
}

bool should_stop(double j_t, double j_t1, double j0, const PidConfig& cfg) {
  return std::fabs((j_t - j_t1) / (j0 + cfg.eps_j)) < cfg.tau;
}

const char* to_string(PidTermination t) {
  switch (t) {
    case PidTermination::MaxSteps:
      return "MaxSteps";
    case PidTermination::EarlyStop:
      return "EarlyStop";
    case PidTermination::DegenerateObjective:
      return "DegenerateObjective";
  }
  return "?";
}

AlphaEstimate estimate_alpha(const std::function<double(double)>& objective,
                             const PidConfig& cfg) {
  cfg.validate();
  AlphaEstimate out;
  PidTrace& trace = out.trace;

  const double a_lo = cfg.alpha_init_pair.first;   // α(-1)
  const double a_hi = cfg.alpha_init_pair.second;  // α(0)

  const double j_lo = objective(a_lo);
  trace.evaluations = 1;
  if (std::isnan(j_lo)) {
    trace.termination = PidTermination::DegenerateObjective;
    out.alpha_final = 1.0;
    return out;
  }
  const double j_hi = objective(a_hi);
  trace.evaluations = 2;
  trace.j_seed_lo = j_lo;
  trace.j_seed_hi = j_hi;
  if (std::isnan(j_hi)) {
    trace.termination = PidTermination::DegenerateObjective;
    out.alpha_final = 1.0;
    return out;
  }

  trace.best_alpha = j_lo <= j_hi ? a_lo : a_hi;
  trace.best_objective = std::min(j_lo, j_hi);

  const double j0 = j_hi;  // J(α(0)), the normalizer everywhere
  double a_prev2 = a_lo;
  double a_prev = a_hi;
  double j_prev2 = j_lo;
  double j_prev = j_hi;
  double d_prev2 = 0.0;  // d(-1)
  double d_prev = 0.0;   // d(0)

  trace.termination = PidTermination::MaxSteps;
  for (int t = 1; t <= cfg.max_steps; ++t) {
    const auto [g, d] = deviation_signal(j_prev, j_prev2, j0, a_prev, a_prev2, cfg);
    const double dalpha = pid_increment(d, d_prev, d_prev2, cfg);
    const double a_new = a_prev + dalpha;
    const double j_new = objective(a_new);
    ++trace.evaluations;
    if (std::isnan(j_new)) {
      trace.termination = PidTermination::DegenerateObjective;
      out.alpha_final = 1.0;
      return out;
    }
    trace.steps.push_back({t, a_new, j_new, g, d, dalpha});
    if (j_new < trace.best_objective) {
      trace.best_objective = j_new;
      trace.best_alpha = a_new;
    }
    const bool stop = should_stop(j_new, j_prev, j0, cfg);
    a_prev2 = a_prev;
    a_prev = a_new;
    j_prev2 = j_prev;
    j_prev = j_new;
    d_prev2 = d_prev;
    d_prev = d;
    if (stop) {
      trace.termination = PidTermination::EarlyStop;
      break;
    }
  }
  out.alpha_final = a_prev;
  return out;
}

}  // namespace marrq
