#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgare/channel.hpp"
#include "mgare/matrix_ops.hpp"

namespace mgare {

struct Dims {
  Eigen::Index state = 0;            // S
  Eigen::Index rx_antennas = 0;      // N_r per actuator
  Eigen::Index tx_controller = 0;    // N_t^c
  Eigen::Index tx_attacker = 0;      // N_t^a
  Eigen::Index num_controllers = 0;  // |N^c| (= number of actuators)
  Eigen::Index num_attackers = 0;    // |N^a|

  Eigen::Index control_width() const { return tx_controller * num_controllers; }
  Eigen::Index attack_width() const { return tx_attacker * num_attackers; }
};

/// Full problem instance: plant, weights, noise covariances, channel laws.
struct Scenario {
  Dims dims;
  Matrix A;                 // state transition, S x S
  std::vector<Matrix> B;    // actuator input gains, each S x N_r
  Matrix Q;                 // state weight, PD
  Matrix Rc;                // controller weight (block-diagonal), PD
  Matrix Ra;                // attacker weight (block-diagonal), PD
  Matrix W;                 // plant noise covariance, PSD
  Matrix V;                 // channel noise covariance per actuator, PSD
  Vector x0;
  ChannelGrid controller_channels;  // |N^c| x |N^c| links
  ChannelGrid attacker_channels;    // |N^a| x |N^c| links
  std::uint64_t seed = 0;
  int sample_count = 1000;

  void validate() const;  // throws std::invalid_argument naming the field

  /// Covariance of the additive state disturbance, W + sum_i B_i V B_i^T.
  Matrix noise_covariance() const;

  /// Copy with the attacker weight replaced (the sample pool is unaffected).
  Scenario with_attacker_weight(Matrix ra) const;
};

/// Copy with every gated controller link's activation probability replaced.
Scenario with_controller_activation(const Scenario& sc, double delta);

/// Aggregated controller gain: column block j is sum_i B_i H[j][i].
Matrix assemble_control_gain(const Scenario& sc,
                             const std::vector<std::vector<Matrix>>& h_grid);

/// Aggregated attacker gain: column block l is sum_i B_i H[l][i].
Matrix assemble_attack_gain(const Scenario& sc,
                            const std::vector<std::vector<Matrix>>& h_grid);

}  // namespace mgare
