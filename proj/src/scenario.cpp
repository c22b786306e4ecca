#include "mgare/scenario.hpp"

#include <stdexcept>

namespace mgare {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario: " + what);
}

Matrix assemble(const std::vector<Matrix>& B, const std::vector<std::vector<Matrix>>& h,
                Eigen::Index state, Eigen::Index tx, const char* who) {
  const Eigen::Index blocks = static_cast<Eigen::Index>(h.size());
  Matrix out = Matrix::Zero(state, tx * blocks);
  for (Eigen::Index j = 0; j < blocks; ++j) {
    if (h[j].size() != B.size())
      throw std::invalid_argument(std::string(who) + ": channel grid column count mismatch");
    Matrix blk = Matrix::Zero(state, tx);
    for (std::size_t i = 0; i < B.size(); ++i) {
      if (h[j][i].rows() != B[i].cols() || h[j][i].cols() != tx)
        throw std::invalid_argument(std::string(who) + ": channel matrix dimension mismatch");
      blk += B[i] * h[j][i];
    }
    out.middleCols(j * tx, tx) = blk;
  }
  return out;
}

}  // namespace

void Scenario::validate() const {
  const auto& d = dims;
  require(d.state > 0, "state dimension must be positive");
  require(d.rx_antennas > 0, "rx_antennas must be positive");
  require(d.tx_controller > 0 && d.tx_attacker > 0, "tx antenna counts must be positive");
  require(d.num_controllers > 0 && d.num_attackers > 0, "player counts must be positive");
  require(A.rows() == d.state && A.cols() == d.state, "A must be S x S");
  require(static_cast<Eigen::Index>(B.size()) == d.num_controllers,
          "need one input gain per actuator");
  for (const Matrix& b : B)
    require(b.rows() == d.state && b.cols() == d.rx_antennas, "B_i must be S x N_r");
  require(Q.rows() == d.state && Q.cols() == d.state, "Q must be S x S");
  require(is_pd(Q), "Q must be positive definite");
  require(Rc.rows() == d.control_width() && Rc.cols() == d.control_width(),
          "Rc must match the stacked control width");
  require(is_pd(Rc), "Rc must be positive definite");
  require(Ra.rows() == d.attack_width() && Ra.cols() == d.attack_width(),
          "Ra must match the stacked attack width");
  require(is_pd(Ra), "Ra must be positive definite");
  require(W.rows() == d.state && W.cols() == d.state && is_psd(W),
          "W must be S x S positive semidefinite");
  require(V.rows() == d.rx_antennas && V.cols() == d.rx_antennas && is_psd(V),
          "V must be N_r x N_r positive semidefinite");
  require(x0.size() == d.state, "x0 must have length S");
  require(sample_count >= 1, "sample_count must be >= 1");

  controller_channels.validate();
  require(controller_channels.num_rows() == d.num_controllers &&
              controller_channels.num_cols() == d.num_controllers,
          "controller channel grid must be |N^c| x |N^c|");
  require(controller_channels.models[0][0].rows() == d.rx_antennas &&
              controller_channels.models[0][0].cols() == d.tx_controller,
          "controller links must be N_r x N_t^c");
  attacker_channels.validate();
  require(attacker_channels.num_rows() == d.num_attackers &&
              attacker_channels.num_cols() == d.num_controllers,
          "attacker channel grid must be |N^a| x |N^c|");
  require(attacker_channels.models[0][0].rows() == d.rx_antennas &&
              attacker_channels.models[0][0].cols() == d.tx_attacker,
          "attacker links must be N_r x N_t^a");
}

Matrix Scenario::noise_covariance() const {
  Matrix n = W;
  for (const Matrix& b : B) n += b * V * b.transpose();
  return symmetrized(n);
}

Scenario Scenario::with_attacker_weight(Matrix ra) const {
  Scenario out = *this;
  out.Ra = std::move(ra);
  return out;
}

Scenario with_controller_activation(const Scenario& sc, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("with_controller_activation: delta outside [0,1]");
  Scenario out = sc;
  for (auto& row : out.controller_channels.models)
    for (auto& m : row)
      if (m.gated()) std::get<BernoulliGated>(m.law).p = delta;
  return out;
}

Matrix assemble_control_gain(const Scenario& sc,
                             const std::vector<std::vector<Matrix>>& h_grid) {
  if (static_cast<Eigen::Index>(h_grid.size()) != sc.dims.num_controllers)
    throw std::invalid_argument("assemble_control_gain: grid row count mismatch");
  return assemble(sc.B, h_grid, sc.dims.state, sc.dims.tx_controller, "assemble_control_gain");
}

Matrix assemble_attack_gain(const Scenario& sc,
                            const std::vector<std::vector<Matrix>>& h_grid) {
  if (static_cast<Eigen::Index>(h_grid.size()) != sc.dims.num_attackers)
    throw std::invalid_argument("assemble_attack_gain: grid row count mismatch");
  return assemble(sc.B, h_grid, sc.dims.state, sc.dims.tx_attacker, "assemble_attack_gain");
}

}  // namespace mgare
