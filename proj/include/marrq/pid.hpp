#ifndef MARRQ_PID_HPP
#define MARRQ_PID_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace marrq {

/// Feedback-loop settings for the per-module residual coefficient search.
/// Defaults are the reference configuration: T = 3, unit gains, β = 10,
/// ε_J = 1e-8, ε_α = 1e-6, τ = 1e-5, seeds α(-1) = 0 and α(0) = 1.
struct PidConfig {
  int max_steps = 3;
  double kp = 1.0;
  double ki = 1.0;
  double kd = 1.0;
  double beta = 10.0;
  double eps_j = 1e-8;
  double eps_alpha = 1e-6;
  double tau = 1e-5;
  std::pair<double, double> alpha_init_pair{0.0, 1.0};

  void validate() const;
};

enum class PidTermination { MaxSteps, EarlyStop, DegenerateObjective };

struct PidStep {
  int t = 0;
  double alpha = 0.0;
  double objective = 0.0;
  double g = 0.0;
  double d = 0.0;
  double delta_alpha = 0.0;
};

struct PidTrace {
  double j_seed_lo = 0.0;  // J at α(-1)
  double j_seed_hi = 0.0;  // J at α(0)
  std::vector<PidStep> steps;
  PidTermination termination = PidTermination::MaxSteps;
  std::size_t evaluations = 0;  // objective calls: 2 seeds + one per step
  double best_alpha = 0.0;      // best-seen (diagnostic only, never returned)
  double best_objective = 0.0;
};

/// Normalized finite-difference trend of the objective and its bounded
/// response:
///   g = ((J(t-1) − J(t-2)) / (J0 + ε_J)) / (α(t-1) − α(t-2) + ε_α)
///   d = tanh(−β g)
std::pair<double, double> deviation_signal(double j_prev, double j_prev2, double j0,
                                           double a_prev, double a_prev2,
                                           const PidConfig& cfg);

/// Incremental update: Kp(d_t − d_{t-1}) + Ki d_t + Kd(d_t − 2d_{t-1} + d_{t-2}).
double pid_increment(double d_t, double d_t1, double d_t2, const PidConfig& cfg);

/// True iff |(J_t − J_{t-1}) / (J0 + ε_J)| < τ.
bool should_stop(double j_t, double j_t1, double j0, const PidConfig& cfg);

struct AlphaEstimate {
  double alpha_final = 1.0;
  PidTrace trace;
};

/// Runs the feedback loop against a pure objective α ↦ J(α). Seeds at
/// α(-1) and α(0), then iterates t = 1..T with the stopping check after
/// every completed step. Returns the α of the last completed step. A NaN
/// objective terminates with DegenerateObjective and α = 1.
AlphaEstimate estimate_alpha(const std::function<double(double)>& objective,
                             const PidConfig& cfg);

const char* to_string(PidTermination t);

}  // namespace marrq

#endif
