#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mgare/scenario.hpp"

namespace mgare {

/// A weighted set of realizations of one aggregated gain matrix.
struct WeightedAtoms {
  std::vector<Matrix> atoms;
  std::vector<double> weights;  // sum to 1; uniform 1/M for sampled pools
  bool exact = false;
};

/// Frozen set of channel realizations. Every expectation in one analysis is
/// taken over this pool, so independently computed quantities share the same
/// randomness (common random numbers) and the operator monotonicity of the
/// Riccati map holds sample-wise.
struct SamplePool {
  std::uint64_t seed = 0;
  int sample_count = 0;
  WeightedAtoms bc;  // controller gains B^c(k)
  WeightedAtoms ba;  // attacker gains B^a(k)

  bool exact() const { return bc.exact && ba.exact; }
  const Matrix& mean_ba() const { return mean_ba_; }
  const Matrix& entry_variance_ba() const { return entry_var_ba_; }

  Matrix mean_ba_;       // E[B^a]
  Matrix entry_var_ba_;  // entrywise variance of B^a
};

/// Exact enumeration when every channel has finite support and the joint
/// support fits under `exact_cap`; otherwise `samples` i.i.d. draws with
/// counter-based seeding. Throws std::length_error when force_exact is set
/// and the support exceeds the cap.
SamplePool build_pool(const Scenario& sc, std::uint64_t seed, int samples,
                      bool force_exact = false, std::size_t exact_cap = 4096);

/// Shared-gate reweighting: given a pool built at activation one, prepends a
/// zero controller-gain atom of weight (1 - delta) and scales the remaining
/// weights by delta. Exact for the shared-gate channel family, and keeps the
/// underlying draws fixed across a delta sweep.
SamplePool with_shared_gate(const SamplePool& pool, double delta);

/// Weighted average of fn over the controller-gain atoms, accumulated in
/// ascending pool order for bit reproducibility.
Matrix expect_over_bc(const SamplePool& pool, const std::function<Matrix(const Matrix&)>& fn);

struct AttackerMoments {
  Matrix mean;           // E[B^a]
  Matrix second_moment;  // E[(B^a)^T P B^a]
  Matrix cov_term;       // second_moment - mean^T P mean
};

AttackerMoments attacker_moments(const SamplePool& pool, const Matrix& P);

/// Largest entrywise variance of the attacker gain.
double sigma2_ba(const SamplePool& pool);

}  // namespace mgare
