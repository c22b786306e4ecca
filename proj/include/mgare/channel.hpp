#pragma once

#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "mgare/matrix_ops.hpp"

namespace mgare {

/// Finitely supported channel matrix law.
struct FiniteSupport {
  std::vector<Matrix> atoms;
  std::vector<double> probs;  // simplex weights, sum to 1 within 1e-12
};

/// Entrywise independent Gaussian law.
struct GaussianIid {
  Matrix mean;
  Matrix stddev;  // entrywise, >= 0
};

/// Bernoulli on/off gate in front of another law: value w.p. p, zero otherwise.
struct BernoulliGated {
  double p = 1.0;
  std::shared_ptr<const struct ChannelModel> inner;
};

struct ChannelModel {
  std::variant<FiniteSupport, GaussianIid, BernoulliGated> law;

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool finite_support() const;
  bool gated() const { return std::holds_alternative<BernoulliGated>(law); }
  double gate_prob() const;  // 1 when not gated

  void validate() const;  // throws std::invalid_argument
};

ChannelModel finite_channel(std::vector<Matrix> atoms, std::vector<double> probs);
ChannelModel deterministic_channel(Matrix value);
ChannelModel gaussian_channel(Matrix mean, double stddev);
ChannelModel gaussian_channel(Matrix mean, Matrix stddev);
ChannelModel gated_channel(double p, ChannelModel inner);

/// How the Bernoulli gates of a channel grid are coupled across links.
/// PerTransmitter draws one gate per grid row; Shared draws a single gate for
/// the whole grid. Gate probabilities must agree within a coupled group.
enum class GateCoupling { Independent, PerTransmitter, Shared };

struct ChannelGrid {
  std::vector<std::vector<ChannelModel>> models;  // [transmitter][actuator]
  GateCoupling coupling = GateCoupling::Independent;

  Eigen::Index num_rows() const { return static_cast<Eigen::Index>(models.size()); }
  Eigen::Index num_cols() const {
    return models.empty() ? 0 : static_cast<Eigen::Index>(models.front().size());
  }
  bool finite_support() const;
  void validate() const;

  /// One joint draw of every link matrix, honoring the gate coupling.
  std::vector<std::vector<Matrix>> draw(std::mt19937_64& rng) const;

  /// Joint support of the grid as (weight, per-link matrices) pairs.
  /// Only valid when finite_support(); pre-merge combination count is
  /// bounded by the caller via max_combinations.
  struct SupportAtom {
    double weight;
    std::vector<std::vector<Matrix>> links;
  };
  std::vector<SupportAtom> enumerate(std::size_t max_combinations) const;

  /// Product of source cardinalities (gates x finite atoms) or 0 when any
  /// link has continuous support.
  std::size_t support_size() const;
};

}  // namespace mgare
