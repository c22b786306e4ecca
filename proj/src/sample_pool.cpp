#include "mgare/sample_pool.hpp"

#include <cstring>
#include <map>
#include <stdexcept>

#include "mgare/rng.hpp"

namespace mgare {

namespace {

constexpr std::uint64_t kBcStream = 0x6263ULL;  // "bc"
constexpr std::uint64_t kBaStream = 0x6261ULL;  // "ba"

// Bit-exact key for merging duplicate atoms of an exact enumeration.
std::string atom_key(const Matrix& m) {
  std::string key(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  return key;
}

WeightedAtoms enumerate_gains(const Scenario& sc, const ChannelGrid& grid, bool attacker,
                              std::size_t cap) {
  WeightedAtoms out;
  out.exact = true;
  std::map<std::string, std::size_t> seen;
  for (const auto& atom : grid.enumerate(cap)) {
    Matrix g = attacker ? assemble_attack_gain(sc, atom.links)
                        : assemble_control_gain(sc, atom.links);
    const std::string key = atom_key(g);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, out.atoms.size());
      out.atoms.push_back(std::move(g));
      out.weights.push_back(atom.weight);
    } else {
      out.weights[it->second] += atom.weight;
    }
  }
  return out;
}

WeightedAtoms sample_gains(const Scenario& sc, const ChannelGrid& grid, bool attacker,
                           std::uint64_t seed, std::uint64_t stream, int samples) {
  WeightedAtoms out;
  out.exact = false;
  out.atoms.reserve(samples);
  out.weights.assign(samples, 1.0 / samples);
  for (int i = 0; i < samples; ++i) {
    auto rng = substream(seed, {stream, static_cast<std::uint64_t>(i)});
    auto links = grid.draw(rng);
    out.atoms.push_back(attacker ? assemble_attack_gain(sc, links)
                                 : assemble_control_gain(sc, links));
  }
  return out;
}

WeightedAtoms build_side(const Scenario& sc, const ChannelGrid& grid, bool attacker,
                         std::uint64_t seed, std::uint64_t stream, int samples,
                         bool force_exact, std::size_t cap) {
  if (grid.finite_support()) {
    const std::size_t n = grid.support_size();
    if (n <= cap) return enumerate_gains(sc, grid, attacker, cap);
    if (force_exact)
      throw std::length_error("build_pool: joint channel support exceeds the exact cap");
  } else if (force_exact) {
    throw std::length_error("build_pool: continuous channel law cannot be enumerated");
  }
  return sample_gains(sc, grid, attacker, seed, stream, samples);
}

}  // namespace

SamplePool build_pool(const Scenario& sc, std::uint64_t seed, int samples, bool force_exact,
                      std::size_t exact_cap) {
  if (samples < 1) throw std::invalid_argument("build_pool: samples must be >= 1");
  sc.validate();
  SamplePool pool;
  pool.seed = seed;
  pool.sample_count = samples;
  pool.bc = build_side(sc, sc.controller_channels, false, seed, kBcStream, samples,
                       force_exact, exact_cap);
  pool.ba = build_side(sc, sc.attacker_channels, true, seed, kBaStream, samples,
                       force_exact, exact_cap);

  const Eigen::Index s = sc.dims.state, w = sc.dims.attack_width();
  Matrix mean = Matrix::Zero(s, w);
  Matrix m2 = Matrix::Zero(s, w);
  for (std::size_t i = 0; i < pool.ba.atoms.size(); ++i) {
    mean += pool.ba.weights[i] * pool.ba.atoms[i];
    m2 += pool.ba.weights[i] * pool.ba.atoms[i].cwiseProduct(pool.ba.atoms[i]);
  }
  pool.mean_ba_ = mean;
  pool.entry_var_ba_ = (m2 - mean.cwiseProduct(mean)).cwiseMax(0.0);
  return pool;
}

SamplePool with_shared_gate(const SamplePool& pool, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("with_shared_gate: delta outside [0,1]");
  if (pool.bc.atoms.empty()) throw std::invalid_argument("with_shared_gate: empty pool");
  SamplePool out = pool;
  out.bc.atoms.clear();
  out.bc.weights.clear();
  out.bc.atoms.push_back(Matrix::Zero(pool.bc.atoms[0].rows(), pool.bc.atoms[0].cols()));
  out.bc.weights.push_back(1.0 - delta);
  for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i) {
    out.bc.atoms.push_back(pool.bc.atoms[i]);
    out.bc.weights.push_back(delta * pool.bc.weights[i]);
  }
  return out;
}

Matrix expect_over_bc(const SamplePool& pool, const std::function<Matrix(const Matrix&)>& fn) {
  if (pool.bc.atoms.empty()) throw std::invalid_argument("expect_over_bc: empty pool");
  Matrix acc = pool.bc.weights[0] * fn(pool.bc.atoms[0]);
  for (std::size_t i = 1; i < pool.bc.atoms.size(); ++i)
    acc += pool.bc.weights[i] * fn(pool.bc.atoms[i]);
  return acc;
}

AttackerMoments attacker_moments(const SamplePool& pool, const Matrix& P) {
  AttackerMoments out;
  out.mean = pool.mean_ba();
  const Eigen::Index w = out.mean.cols();
  Matrix m2 = Matrix::Zero(w, w);
  for (std::size_t i = 0; i < pool.ba.atoms.size(); ++i)
    m2 += pool.ba.weights[i] * (pool.ba.atoms[i].transpose() * P * pool.ba.atoms[i]);
  out.second_moment = symmetrized(m2);
  out.cov_term = symmetrized(out.second_moment - out.mean.transpose() * P * out.mean);
  return out;
}

double sigma2_ba(const SamplePool& pool) {
  if (pool.entry_variance_ba().size() == 0) return 0.0;
  return pool.entry_variance_ba().maxCoeff();
}

}  // namespace mgare
