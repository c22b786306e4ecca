#pragma once

#include <random>

#include "mgare/example_scenarios.hpp"
#include "mgare/sample_pool.hpp"

namespace mgare::testing {

/// Two-state instance with exact pools on both sides. The controller gain
/// takes three finite atoms (one of them zero); the attacker gain two.
inline Scenario two_state_exact(double ra_scale = 60.0) {
  Scenario sc;
  sc.dims.state = 2;
  sc.dims.rx_antennas = 2;
  sc.dims.tx_controller = 1;
  sc.dims.tx_attacker = 1;
  sc.dims.num_controllers = 1;
  sc.dims.num_attackers = 1;
  sc.A.resize(2, 2);
  sc.A << 1.1, 0.3, 0.0, 0.7;
  sc.B = {(Matrix(2, 2) << 1.0, 0.1, -0.2, 0.9).finished()};
  sc.Q = (Matrix(2, 2) << 1.0, 0.2, 0.2, 1.5).finished();
  sc.Rc = Matrix::Identity(1, 1);
  sc.Ra = ra_scale * Matrix::Identity(1, 1);
  sc.W = 0.05 * Matrix::Identity(2, 2);
  sc.V = 0.02 * Matrix::Identity(2, 2);
  sc.x0 = (Vector(2) << 1.0, -0.5).finished();
  sc.controller_channels.coupling = GateCoupling::Independent;
  sc.controller_channels.models = {{finite_channel(
      {(Matrix(2, 1) << 1.0, 0.4).finished(), (Matrix(2, 1) << -0.3, 1.2).finished(),
       Matrix::Zero(2, 1)},
      {0.45, 0.35, 0.2})}};
  sc.attacker_channels.coupling = GateCoupling::Independent;
  sc.attacker_channels.models = {{finite_channel(
      {(Matrix(2, 1) << 0.6, -0.2).finished(), (Matrix(2, 1) << 0.1, 0.5).finished()},
      {0.5, 0.5})}};
  sc.seed = 7;
  sc.sample_count = 16;
  sc.validate();
  return sc;
}

/// Gated single-controller instance with deterministic full-rank channel:
/// the aggregated gain is {G, 0} with weights {delta, 1-delta}.
inline Scenario gated_full_rank(Eigen::Index s, double delta, double a_scale,
                                std::uint64_t seed, double attack_scale = 0.2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto randn = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
  };

  Scenario sc;
  sc.dims.state = s;
  sc.dims.rx_antennas = s;
  sc.dims.tx_controller = s;
  sc.dims.tx_attacker = 1;
  sc.dims.num_controllers = 1;
  sc.dims.num_attackers = 1;
  Matrix a = randn(s, s);
  sc.A = a_scale * a / spectral_radius(a);
  Matrix b = randn(s, s);
  b += s * Matrix::Identity(s, s);  // keep the gain well conditioned
  sc.B = {b};
  sc.Q = Matrix::Identity(s, s);
  sc.Rc = Matrix::Identity(s, s);
  sc.Ra = 50.0 * Matrix::Identity(1, 1);
  sc.W = 0.1 * Matrix::Identity(s, s);
  sc.V = 0.1 * Matrix::Identity(s, s);
  sc.x0 = Vector::Ones(s);
  Matrix h = randn(s, s);
  h += s * Matrix::Identity(s, s);
  sc.controller_channels.coupling = GateCoupling::Shared;
  sc.controller_channels.models = {{gated_channel(delta, deterministic_channel(h))}};
  Matrix ha = attack_scale * randn(s, 1);
  sc.attacker_channels.coupling = GateCoupling::Independent;
  sc.attacker_channels.models = {
      {finite_channel({ha, Matrix(0.5 * ha)}, {0.5, 0.5})}};
  sc.seed = seed;
  sc.sample_count = 8;
  sc.validate();
  return sc;
}

/// Random symmetric PD matrix with eigenvalues in [lo, hi].
inline Matrix random_pd(std::mt19937_64& rng, Eigen::Index n, double lo = 0.5,
                        double hi = 2.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = nd(rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Vector lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam(i) = u(rng);
  return symmetrized(q * lam.asDiagonal() * q.transpose());
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                            double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

}  // namespace mgare::testing
