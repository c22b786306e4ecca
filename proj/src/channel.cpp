#include "mgare/channel.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace mgare {

namespace {

const ChannelModel& inner_of(const ChannelModel& m) {
  return *std::get<BernoulliGated>(m.law).inner;
}

// Sources of randomness below are always consumed in a fixed order: gate
// groups first (ascending group id), then link matrices row-major.
Matrix draw_ungated(const ChannelModel& m, std::mt19937_64& rng) {
  if (const auto* fs = std::get_if<FiniteSupport>(&m.law)) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < fs->atoms.size(); ++i) {
      acc += fs->probs[i];
      if (r <= acc || i + 1 == fs->atoms.size()) return fs->atoms[i];
    }
    return fs->atoms.back();
  }
  const auto& g = std::get<GaussianIid>(m.law);
  Matrix out(g.mean.rows(), g.mean.cols());
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = g.mean(i, j) + g.stddev(i, j) * nd(rng);
  return out;
}

}  // namespace

Eigen::Index ChannelModel::rows() const {
  if (const auto* fs = std::get_if<FiniteSupport>(&law)) return fs->atoms.at(0).rows();
  if (const auto* g = std::get_if<GaussianIid>(&law)) return g->mean.rows();
  return inner_of(*this).rows();
}

Eigen::Index ChannelModel::cols() const {
  if (const auto* fs = std::get_if<FiniteSupport>(&law)) return fs->atoms.at(0).cols();
  if (const auto* g = std::get_if<GaussianIid>(&law)) return g->mean.cols();
  return inner_of(*this).cols();
}

bool ChannelModel::finite_support() const {
  if (std::holds_alternative<FiniteSupport>(law)) return true;
  if (std::holds_alternative<GaussianIid>(law)) return false;
  return inner_of(*this).finite_support();
}

double ChannelModel::gate_prob() const {
  if (const auto* b = std::get_if<BernoulliGated>(&law)) return b->p;
  return 1.0;
}

void ChannelModel::validate() const {
  if (const auto* fs = std::get_if<FiniteSupport>(&law)) {
    if (fs->atoms.empty()) throw std::invalid_argument("channel: finite support needs atoms");
    if (fs->atoms.size() != fs->probs.size())
      throw std::invalid_argument("channel: atoms/probs size mismatch");
    double s = 0.0;
    for (double p : fs->probs) {
      if (p < 0.0) throw std::invalid_argument("channel: negative atom probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("channel: atom probabilities sum to " + std::to_string(s));
    for (const Matrix& a : fs->atoms)
      if (a.rows() != fs->atoms[0].rows() || a.cols() != fs->atoms[0].cols())
        throw std::invalid_argument("channel: inconsistent atom dimensions");
    return;
  }
  if (const auto* g = std::get_if<GaussianIid>(&law)) {
    if (g->stddev.rows() != g->mean.rows() || g->stddev.cols() != g->mean.cols())
      throw std::invalid_argument("channel: gaussian mean/stddev dimension mismatch");
    if ((g->stddev.array() < 0.0).any())
      throw std::invalid_argument("channel: negative gaussian stddev");
    return;
  }
  const auto& b = std::get<BernoulliGated>(law);
  if (!(b.p >= 0.0 && b.p <= 1.0))
    throw std::invalid_argument("channel: gate probability outside [0,1]");
  if (!b.inner) throw std::invalid_argument("channel: gated model has no inner law");
  if (b.inner->gated()) throw std::invalid_argument("channel: nested gates are not supported");
  b.inner->validate();
}

ChannelModel finite_channel(std::vector<Matrix> atoms, std::vector<double> probs) {
  ChannelModel m{FiniteSupport{std::move(atoms), std::move(probs)}};
  m.validate();
  return m;
}

ChannelModel deterministic_channel(Matrix value) {
  return finite_channel({std::move(value)}, {1.0});
}

ChannelModel gaussian_channel(Matrix mean, double stddev) {
  Matrix sd = Matrix::Constant(mean.rows(), mean.cols(), stddev);
  return gaussian_channel(std::move(mean), std::move(sd));
}

ChannelModel gaussian_channel(Matrix mean, Matrix stddev) {
  ChannelModel m{GaussianIid{std::move(mean), std::move(stddev)}};
  m.validate();
  return m;
}

ChannelModel gated_channel(double p, ChannelModel inner) {
  ChannelModel m{BernoulliGated{p, std::make_shared<ChannelModel>(std::move(inner))}};
  m.validate();
  return m;
}

bool ChannelGrid::finite_support() const {
  for (const auto& row : models)
    for (const auto& m : row)
      if (!m.finite_support()) return false;
  return true;
}

namespace {

struct GateGroup {
  double p;
  std::vector<std::pair<std::size_t, std::size_t>> links;
};

std::vector<GateGroup> gate_groups(const ChannelGrid& grid) {
  std::vector<GateGroup> groups;
  auto add = [&](std::size_t key_limit) {
    groups.assign(key_limit, GateGroup{-1.0, {}});
  };
  switch (grid.coupling) {
    case GateCoupling::Shared:
      add(1);
      break;
    case GateCoupling::PerTransmitter:
      add(grid.models.size());
      break;
    case GateCoupling::Independent:
      add(grid.models.size() * (grid.models.empty() ? 0 : grid.models[0].size()));
      break;
  }
  for (std::size_t j = 0; j < grid.models.size(); ++j) {
    for (std::size_t i = 0; i < grid.models[j].size(); ++i) {
      const ChannelModel& m = grid.models[j][i];
      if (!m.gated()) continue;
      std::size_t key = 0;
      if (grid.coupling == GateCoupling::PerTransmitter) key = j;
      if (grid.coupling == GateCoupling::Independent) key = j * grid.models[j].size() + i;
      GateGroup& g = groups[key];
      if (g.p < 0.0) g.p = m.gate_prob();
      else if (std::abs(g.p - m.gate_prob()) > 1e-12)
        throw std::invalid_argument("channel grid: coupled gates must share one probability");
      g.links.emplace_back(j, i);
    }
  }
  std::vector<GateGroup> active;
  for (auto& g : groups)
    if (!g.links.empty()) active.push_back(std::move(g));
  return active;
}

}  // namespace

void ChannelGrid::validate() const {
  if (models.empty()) throw std::invalid_argument("channel grid: empty");
  const std::size_t cols = models[0].size();
  for (const auto& row : models) {
    if (row.size() != cols) throw std::invalid_argument("channel grid: ragged rows");
    for (const auto& m : row) {
      m.validate();
      if (m.rows() != models[0][0].rows() || m.cols() != models[0][0].cols())
        throw std::invalid_argument("channel grid: inconsistent link dimensions");
    }
  }
  gate_groups(*this);  // throws on inconsistent coupled probabilities
}

std::vector<std::vector<Matrix>> ChannelGrid::draw(std::mt19937_64& rng) const {
  const auto groups = gate_groups(*this);
  std::vector<char> gate_on;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& g : groups) gate_on.push_back(u(rng) < g.p ? 1 : 0);

  // Map each gated link to its group's bit.
  std::vector<std::vector<int>> gate_of(models.size(),
                                        std::vector<int>(models[0].size(), -1));
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (auto [j, i] : groups[gi].links) gate_of[j][i] = static_cast<int>(gi);

  std::vector<std::vector<Matrix>> out(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    out[j].reserve(models[j].size());
    for (std::size_t i = 0; i < models[j].size(); ++i) {
      const ChannelModel& m = models[j][i];
      if (m.gated()) {
        const ChannelModel& in = *std::get<BernoulliGated>(m.law).inner;
        // The inner draw is consumed regardless of the gate so that the
        // substream layout does not depend on realized gate bits.
        Matrix v = draw_ungated(in, rng);
        out[j].push_back(gate_on[gate_of[j][i]] ? v : Matrix::Zero(m.rows(), m.cols()));
      } else {
        out[j].push_back(draw_ungated(m, rng));
      }
    }
  }
  return out;
}

std::size_t ChannelGrid::support_size() const {
  if (!finite_support()) return 0;
  const auto groups = gate_groups(*this);
  std::vector<std::vector<int>> gate_of(models.size(),
                                        std::vector<int>(models[0].size(), -1));
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (auto [j, i] : groups[gi].links) gate_of[j][i] = static_cast<int>(gi);

  std::size_t total = 0;
  const std::size_t patterns = std::size_t{1} << groups.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    std::size_t combos = 1;
    for (std::size_t j = 0; j < models.size(); ++j) {
      for (std::size_t i = 0; i < models[j].size(); ++i) {
        const ChannelModel& m = models[j][i];
        const ChannelModel& eff = m.gated() ? *std::get<BernoulliGated>(m.law).inner : m;
        const bool off = m.gated() && !((mask >> gate_of[j][i]) & 1);
        if (!off) combos *= std::get<FiniteSupport>(eff.law).atoms.size();
        if (combos > (std::size_t{1} << 40)) return combos;  // overflow guard
      }
    }
    total += combos;
  }
  return total;
}

std::vector<ChannelGrid::SupportAtom> ChannelGrid::enumerate(std::size_t max_combinations) const {
  if (!finite_support())
    throw std::domain_error("channel grid: enumerate called on continuous support");
  if (support_size() > max_combinations)
    throw std::length_error("channel grid: joint support exceeds cap");

  const auto groups = gate_groups(*this);
  std::vector<std::vector<int>> gate_of(models.size(),
                                        std::vector<int>(models[0].size(), -1));
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (auto [j, i] : groups[gi].links) gate_of[j][i] = static_cast<int>(gi);

  std::vector<SupportAtom> atoms;
  const std::size_t patterns = std::size_t{1} << groups.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    double gate_w = 1.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      gate_w *= ((mask >> gi) & 1) ? groups[gi].p : (1.0 - groups[gi].p);
    if (gate_w == 0.0) continue;

    // Depth-first over the links, row-major.
    std::vector<std::vector<Matrix>> links(models.size());
    for (std::size_t j = 0; j < models.size(); ++j)
      links[j].resize(models[j].size());

    struct Frame { std::size_t j, i; };
    std::vector<Frame> order;
    for (std::size_t j = 0; j < models.size(); ++j)
      for (std::size_t i = 0; i < models[j].size(); ++i) order.push_back({j, i});

    std::function<void(std::size_t, double)> rec = [&](std::size_t idx, double w) {
      if (idx == order.size()) {
        atoms.push_back({gate_w * w, links});
        return;
      }
      auto [j, i] = order[idx];
      const ChannelModel& m = models[j][i];
      const bool off = m.gated() && !((mask >> gate_of[j][i]) & 1);
      if (off) {
        links[j][i] = Matrix::Zero(m.rows(), m.cols());
        rec(idx + 1, w);
        return;
      }
      const ChannelModel& eff = m.gated() ? *std::get<BernoulliGated>(m.law).inner : m;
      const auto& fs = std::get<FiniteSupport>(eff.law);
      for (std::size_t a = 0; a < fs.atoms.size(); ++a) {
        if (fs.probs[a] == 0.0) continue;
        links[j][i] = fs.atoms[a];
        rec(idx + 1, w * fs.probs[a]);
      }
    };
    rec(0, 1.0);
  }
  return atoms;
}

}  // namespace mgare
