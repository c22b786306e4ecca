#pragma once

#include <vector>

#include "mgare/sample_pool.hpp"

namespace mgare {

/// Blocks of the stacked action quadratic for one controller-gain
/// realization:
///   controller_block = (B^c)^T P B^c + R^c
///   cross_block      = (B^c)^T P E[B^a]
///   attacker_margin  = R^a - E[(B^a)^T P B^a]
///   stacked          = [[controller_block, cross_block],
///                       [cross_block^T,   -attacker_margin]]
/// The stacked matrix is the inverse term of the Riccati operator.
struct ActionQuadratic {
  Matrix controller_block;
  Matrix cross_block;
  Matrix attacker_margin;
  Matrix stacked;

  Eigen::Index control_width() const { return controller_block.rows(); }
  Eigen::Index attack_width() const { return attacker_margin.rows(); }

  /// Solves stacked * x = rhs by block elimination (controller block is PD,
  /// its Schur complement is ND inside the concavity region).
  Matrix solve(const Matrix& rhs) const;
};

ActionQuadratic action_quadratic(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                                 const Matrix& bc_sample);

/// As above with a precomputed attacker margin Ra - E[(B^a)^T P B^a]; the
/// margin only depends on P, so per-slot rollouts cache it.
ActionQuadratic action_quadratic(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                                 const Matrix& bc_sample, const Matrix& attacker_margin);

/// True iff Ra - E[(B^a)^T P B^a] is strictly positive definite, i.e. the
/// attacker's inner maximization stays concave at P.
bool in_concavity_region(const Scenario& sc, const SamplePool& pool, const Matrix& P);

struct ConcavityViolation : std::domain_error {
  using std::domain_error::domain_error;
};

/// One application of the game Riccati operator,
///   f(P) = A^T E[ P - P B(k) Phi(P;k)^{-1} B(k)^T P ] A + Q,
/// with B(k) = [B^c(k), E[B^a]]. Throws ConcavityViolation when P leaves the
/// concavity region.
Matrix riccati_operator(const Scenario& sc, const SamplePool& pool, const Matrix& P);

struct RiccatiIterates {
  std::vector<Matrix> values;        // f^0(Q) .. f^k(Q)
  std::vector<char> membership_ok;   // per iterate
  bool stopped_early = false;        // concavity violation or norm blow-up
};

RiccatiIterates riccati_iterates(const Scenario& sc, const SamplePool& pool, int horizon,
                                 double divergence_cap = 1e12);

enum class SolveVerdict { Exists, Diverged, ConcavityViolated, Undecided };

const char* to_string(SolveVerdict v);

struct SolveOptions {
  double tol = 1e-10;
  int k_max = 10000;
  double divergence_cap = 1e12;
  bool keep_trajectory = true;
};

struct MgareSolution {
  Matrix P_star;                    // last iterate; the fixed point when Exists
  int iterations = 0;
  double residual = 0.0;            // ||f(P*) - P*|| / ||P*||
  std::vector<double> trajectory_norms;
  std::vector<char> membership_ok;
  SolveVerdict verdict = SolveVerdict::Undecided;
  int failure_step = -1;            // step index for Diverged/ConcavityViolated

  bool exists() const { return verdict == SolveVerdict::Exists; }
};

/// Iterates f^k(Q) to the minimal fixed point. Failures are reported through
/// the verdict, not exceptions.
MgareSolution solve_mgare(const Scenario& sc, const SamplePool& pool,
                          const SolveOptions& opt = {});

/// Value of the game at the minimal solution: Tr(P* (W + sum_i B_i V B_i^T)).
double game_value(const Scenario& sc, const MgareSolution& sol);

}  // namespace mgare
