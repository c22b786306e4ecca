#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mgare/riccati.hpp"

namespace mgare {

/// Stacked saddle actions for one realized controller gain:
/// [u_c; u_a] = -Phi(P;k)^{-1} B(k)^T P A x with B(k) = [B^c(k), E[B^a]].
struct SaddleActions {
  Vector u_control;
  Vector u_attack;
};

SaddleActions steady_actions(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                             const Matrix& bc_sample, const Vector& x);

/// Closed-loop matrix (I - B(k) Phi(P;k)^{-1} B(k)^T P) A for one realized
/// controller gain.
Matrix closed_loop_matrix(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                          const Matrix& bc_sample);

/// E[Xi(k) (x) Xi(k)] over the pool.
Matrix closed_loop_kron_mean(const Scenario& sc, const SamplePool& pool, const Matrix& P);

/// Growth bound on E||x(T0)||^2 under the steady policy:
/// max{||x0||^2, ||W + sum B_i V B_i^T||^2} Tr(sum_{i<T0} E[Xi (x) Xi]^i).
/// Returns +infinity on overflow.
double state_growth_bound(const Scenario& sc, const SamplePool& pool, const Matrix& P_star,
                          int t0);

inline constexpr int kUnboundedSwitch = -1;

/// Smallest beta >= t0 with ||P* - f^{beta-t0}(Q)|| alpha(t0) < 1, or
/// kUnboundedSwitch when none is found within the scan cap.
int policy_switch_slot(const Scenario& sc, const SamplePool& pool, const Matrix& P_star,
                       const std::vector<Matrix>& riccati_seq, int t0, double alpha,
                       int scan_cap = 100000);

struct PolicySpec {
  enum class Kind { SteadyState, Saddle, Custom };
  Kind kind = Kind::SteadyState;
  Matrix P;                    // steady-state gain matrix source
  int t0 = 0;                  // saddle: switch timestamp
  int beta = 0;                // saddle: policy length
  std::vector<Matrix> f_seq;   // saddle: f^0(Q) .. f^{beta - t0}(Q)
  double alpha = 0.0;
  std::vector<Matrix> gains;   // custom: per-slot stacked feedback, u = -gains[k] x

  /// Gain source for slot k: P* before the switch, f^{beta-k-1}(Q) after.
  /// Not meaningful for custom schedules.
  const Matrix& schedule(int k) const;
  int horizon_limit() const;   // slots covered (beta/gains for saddle/custom)
};

/// Saddle policy of the achievable scheme; requires an Exists verdict.
PolicySpec build_saddle_policy(const Scenario& sc, const SamplePool& pool,
                               const MgareSolution& solution, int t0);

struct SimulationConfig {
  int horizon = 1000;
  int runs = 8;
  std::uint64_t seed = 1;
  int burn_in = 0;             // slots discarded from the cost average
  double overflow_cap = 1e9;   // state-norm cap; exceeding runs are flagged
  bool record_trace = true;    // keep the slot-level trace of run 0
};

struct PolicyTrace {
  std::uint64_t seed = 0;
  std::vector<Vector> states;     // x(0) .. x(K)
  std::vector<Vector> controls;   // u^c(0) .. u^c(K-1)
  std::vector<Vector> attacks;
  std::vector<double> stage_costs;
};

struct CostReport {
  double empirical = 0.0;   // mean over runs of the per-run average cost
  double std_error = 0.0;   // run-level standard error
  int horizon = 0;
  int runs = 0;
  int overflow_runs = 0;
};

struct SimulationResult {
  CostReport report;
  PolicyTrace trace;  // run 0, when recorded
};

/// Per-slot perturbation of one side's feedback, drawn once per run:
/// u += scale * G_run * x with G_run entrywise standard normal.
struct DeviationSpec {
  enum class Side { None, Controller, Attacker };
  Side side = Side::None;
  double scale = 0.0;
};

/// Closed-loop rollout. Channel realizations are drawn per (run, slot) from
/// the pool's law so simulated costs are consistent with pool expectations;
/// plant and channel noises are Gaussian with covariances W and V.
SimulationResult simulate(const Scenario& sc, const SamplePool& pool, const PolicySpec& policy,
                          const SimulationConfig& cfg, const DeviationSpec& dev = {});

/// Minimax value of the finite-horizon average cost,
///   (1/K) ||x0||^2_{f^K(Q)-Q} + Tr((1/K) sum_k f^k(Q) (W + sum B_i V B_i^T)).
/// Throws ConcavityViolation naming the first iterate outside the region.
double analytic_finite_horizon_value(const Scenario& sc, const SamplePool& pool, int horizon,
                                     const Vector& x0);

struct DeviationReport {
  double controller_delta = 0.0;  // cost(perturbed controller) - cost(equilibrium)
  double controller_se = 0.0;
  double attacker_delta = 0.0;
  double attacker_se = 0.0;
};

/// Paired-run unilateral deviation test around the steady equilibrium policy.
DeviationReport deviation_test(const Scenario& sc, const SamplePool& pool,
                               const MgareSolution& solution, int horizon, int runs,
                               double scale, std::uint64_t seed);

struct StabilityReport {
  bool stable = false;
  double radius = 0.0;  // rho(E[Xi (x) Xi])
};

StabilityReport mean_square_stable(const Scenario& sc, const SamplePool& pool,
                                   const MgareSolution& solution);

}  // namespace mgare
