#pragma once

#include "mgare/certifier.hpp"
#include "mgare/scenario.hpp"

namespace mgare {

/// Bundled 6x6 symmetric plant and the three actuator input gains used by
/// the example scenarios.
Matrix reference_plant();
std::vector<Matrix> reference_input_gains();

struct ExampleParams {
  double delta = 0.8;          // controller activation probability
  double attacker_delta = 0.5; // attacker activation probability (families 2 and 3)
  std::uint64_t seed = 2024;
  int samples = 1500;
  double noise_w = 0.1;        // W = noise_w * I
  double noise_v = 0.1;        // V = noise_v * I
};

/// Family 1: one shared Bernoulli gate in front of i.i.d. Gaussian MIMO
/// fading, so the aggregated controller gain is full rank w.p. delta and
/// zero otherwise. Attacker links are Gaussian with identity mean.
Scenario example1_scenario(const ExampleParams& p = {});

/// Family 1 with a single deterministic full-rank channel atom behind the
/// shared gate; the pool enumerates exactly two aggregated gains. gain_scale
/// rescales the atom (larger gain means a better-conditioned certificate).
Scenario example1_exact_scenario(double delta, double gain_scale = 1.0,
                                 std::uint64_t seed = 2024);

/// Family 2: interference-free links, one Bernoulli gate per controller,
/// block-diagonal aggregated gain.
Scenario example2_scenario(const ExampleParams& p = {});

/// Family 3: wide-antenna links, one Bernoulli gate per controller; any
/// active controller restores full rank.
Scenario example3_scenario(const ExampleParams& p = {});

/// Family 3 with deterministic full-row-rank channel atoms so the joint
/// support (gate patterns) enumerates exactly.
Scenario example3_exact_scenario(double delta, std::uint64_t seed = 2024);

/// Scalar plant with unit gains and disabled attacker; its minimal solution
/// is the positive root of p^2 - p - 1.
Scenario scalar_benchmark_scenario();

Scenario example_scenario(ExampleKind kind, const ExampleParams& p = {});

}  // namespace mgare
