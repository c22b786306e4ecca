#include "mgare/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mgare/rng.hpp"

namespace mgare {

namespace {

constexpr std::uint64_t kSimBc = 0x73626300ULL;
constexpr std::uint64_t kSimBa = 0x73626100ULL;
constexpr std::uint64_t kSimNoise = 0x73770000ULL;
constexpr std::uint64_t kSimDev = 0x73646576ULL;

// The attacker margin Ra - E[(B^a)^T P B^a] depends only on the gain source
// P; rollouts reuse it across slots that share the same schedule entry.
class MarginCache {
 public:
  MarginCache(const Scenario& sc, const SamplePool& pool) : sc_(sc), pool_(pool) {}

  const Matrix& margin_for(const Matrix& p) {
    if (last_ != &p) {
      margin_ = symmetrized(sc_.Ra - attacker_moments(pool_, p).second_moment);
      last_ = &p;
    }
    return margin_;
  }

 private:
  const Scenario& sc_;
  const SamplePool& pool_;
  const Matrix* last_ = nullptr;
  Matrix margin_;
};

Matrix stacked_gain(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                    const Matrix& bc, const Matrix& attacker_margin) {
  // Feedback matrix F with [u_c; u_a] = -F x.
  const ActionQuadratic q = action_quadratic(sc, pool, P, bc, attacker_margin);
  const Eigen::Index mc = bc.cols(), ma = pool.mean_ba().cols();
  Matrix bp(mc + ma, P.rows());
  bp.topRows(mc) = bc.transpose() * P;
  bp.bottomRows(ma) = pool.mean_ba().transpose() * P;
  return q.solve(bp * sc.A);
}

Matrix stacked_gain(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                    const Matrix& bc) {
  return stacked_gain(sc, pool, P, bc,
                      symmetrized(sc.Ra - attacker_moments(pool, P).second_moment));
}

Matrix chol_factor(const Matrix& cov, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(cov));
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, cov.norm()))
    throw std::domain_error(std::string(what) + ": covariance not PSD");
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Vector gaussian_vector(const Matrix& factor, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(rng);
  return factor * z;
}

std::size_t pick_atom(const WeightedAtoms& side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < side.weights.size(); ++i) {
    acc += side.weights[i];
    if (r <= acc || i + 1 == side.weights.size()) return i;
  }
  return side.weights.size() - 1;
}

}  // namespace

SaddleActions steady_actions(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                             const Matrix& bc_sample, const Vector& x) {
  const Matrix f = stacked_gain(sc, pool, P, bc_sample);
  const Vector u = -(f * x);
  SaddleActions out;
  out.u_control = u.head(bc_sample.cols());
  out.u_attack = u.tail(pool.mean_ba().cols());
  return out;
}

Matrix closed_loop_matrix(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                          const Matrix& bc_sample) {
  const Matrix f = stacked_gain(sc, pool, P, bc_sample);
  const Eigen::Index mc = bc_sample.cols();
  Matrix b(sc.dims.state, mc + pool.mean_ba().cols());
  b.leftCols(mc) = bc_sample;
  b.rightCols(pool.mean_ba().cols()) = pool.mean_ba();
  return sc.A - b * f;
}

Matrix closed_loop_kron_mean(const Scenario& sc, const SamplePool& pool, const Matrix& P) {
  return expect_over_bc(pool, [&](const Matrix& bc) {
    const Matrix xi = closed_loop_matrix(sc, pool, P, bc);
    return kron(xi, xi);
  });
}

double state_growth_bound(const Scenario& sc, const SamplePool& pool, const Matrix& P_star,
                          int t0) {
  if (t0 < 1) throw std::invalid_argument("state_growth_bound: t0 must be >= 1");
  const double lead =
      std::max(sc.x0.squaredNorm(), std::pow(spectral_norm(sc.noise_covariance()), 2));
  const Matrix k = closed_loop_kron_mean(sc, pool, P_star);
  Matrix power = Matrix::Identity(k.rows(), k.cols());
  double acc = 0.0;
  for (int i = 0; i < t0; ++i) {
    acc += power.trace();
    if (!std::isfinite(acc) || acc > 1e300)
      return std::numeric_limits<double>::infinity();
    if (i + 1 < t0) power = k * power;
  }
  return lead * acc;
}

int policy_switch_slot(const Scenario& sc, const SamplePool& pool, const Matrix& P_star,
                       const std::vector<Matrix>& riccati_seq, int t0, double alpha,
                       int scan_cap) {
  if (!std::isfinite(alpha)) return kUnboundedSwitch;
  Matrix fk = sc.Q;
  for (int k = 0; k <= scan_cap; ++k) {
    const Matrix& use = (k < static_cast<int>(riccati_seq.size())) ? riccati_seq[k] : fk;
    if (spectral_norm(Matrix(P_star - use)) * alpha < 1.0) return t0 + k;
    if (k + 1 >= static_cast<int>(riccati_seq.size())) fk = riccati_operator(sc, pool, use);
  }
  return kUnboundedSwitch;
}

const Matrix& PolicySpec::schedule(int k) const {
  if (kind == Kind::Custom)
    throw std::logic_error("policy schedule: custom policies carry gains, not gain sources");
  if (kind == Kind::SteadyState) return P;
  if (k < t0) return P;
  const int idx = beta - k - 1;
  if (idx < 0 || idx >= static_cast<int>(f_seq.size()))
    throw std::out_of_range("policy schedule: slot " + std::to_string(k) +
                            " outside the covered horizon");
  return f_seq[idx];
}

int PolicySpec::horizon_limit() const {
  switch (kind) {
    case Kind::SteadyState: return std::numeric_limits<int>::max();
    case Kind::Saddle: return beta;
    case Kind::Custom: return static_cast<int>(gains.size());
  }
  return 0;
}

PolicySpec build_saddle_policy(const Scenario& sc, const SamplePool& pool,
                               const MgareSolution& solution, int t0) {
  if (!solution.exists())
    throw std::domain_error("build_saddle_policy: solution verdict is not Exists");
  PolicySpec spec;
  spec.kind = PolicySpec::Kind::Saddle;
  spec.P = solution.P_star;
  spec.t0 = t0;
  spec.alpha = state_growth_bound(sc, pool, solution.P_star, t0);

  // Grow the Riccati sequence until the switch criterion is met.
  std::vector<Matrix> seq{sc.Q};
  int beta = kUnboundedSwitch;
  if (std::isfinite(spec.alpha)) {
    for (int k = 0; k <= 100000; ++k) {
      if (spectral_norm(Matrix(solution.P_star - seq.back())) * spec.alpha < 1.0) {
        beta = t0 + k;
        break;
      }
      seq.push_back(riccati_operator(sc, pool, seq.back()));
    }
  }
  if (beta == kUnboundedSwitch)
    throw std::domain_error("build_saddle_policy: switch slot unbounded at this t0");
  spec.beta = beta;
  spec.f_seq = std::move(seq);
  return spec;
}

SimulationResult simulate(const Scenario& sc, const SamplePool& pool, const PolicySpec& policy,
                          const SimulationConfig& cfg, const DeviationSpec& dev) {
  if (cfg.horizon < 1 || cfg.runs < 1)
    throw std::invalid_argument("simulate: horizon and runs must be positive");
  if (policy.horizon_limit() < cfg.horizon)
    throw std::invalid_argument("simulate: policy does not cover the horizon");
  if (cfg.burn_in >= cfg.horizon)
    throw std::invalid_argument("simulate: burn_in must be below the horizon");

  const Matrix w_factor = chol_factor(sc.W, "simulate W");
  const Matrix v_factor = chol_factor(sc.V, "simulate V");
  const Eigen::Index mc = sc.dims.control_width(), ma = sc.dims.attack_width();

  SimulationResult out;
  out.report.horizon = cfg.horizon;
  out.report.runs = cfg.runs;
  std::vector<double> run_costs;
  run_costs.reserve(cfg.runs);
  MarginCache margins(sc, pool);

  for (int run = 0; run < cfg.runs; ++run) {
    Matrix dev_gain;
    if (dev.side != DeviationSpec::Side::None) {
      auto rng = substream(cfg.seed, {kSimDev, static_cast<std::uint64_t>(run)});
      std::normal_distribution<double> nd(0.0, 1.0);
      const Eigen::Index rows = dev.side == DeviationSpec::Side::Controller ? mc : ma;
      dev_gain.resize(rows, sc.dims.state);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < sc.dims.state; ++j) dev_gain(i, j) = nd(rng);
    }

    Vector x = sc.x0;
    double acc = 0.0;
    int counted = 0;
    bool overflowed = false;
    const bool record = cfg.record_trace && run == 0;
    if (record) {
      out.trace.seed = cfg.seed;
      out.trace.states.push_back(x);
    }

    for (int k = 0; k < cfg.horizon; ++k) {
      auto rng_bc = substream(cfg.seed, {kSimBc, static_cast<std::uint64_t>(run),
                                         static_cast<std::uint64_t>(k)});
      auto rng_ba = substream(cfg.seed, {kSimBa, static_cast<std::uint64_t>(run),
                                         static_cast<std::uint64_t>(k)});
      auto rng_noise = substream(cfg.seed, {kSimNoise, static_cast<std::uint64_t>(run),
                                            static_cast<std::uint64_t>(k)});
      const Matrix& bc = pool.bc.atoms[pick_atom(pool.bc, rng_bc)];
      const Matrix& ba = pool.ba.atoms[pick_atom(pool.ba, rng_ba)];

      Vector u;
      if (policy.kind == PolicySpec::Kind::Custom) {
        u = -(policy.gains[k] * x);
      } else {
        const Matrix& p_k = policy.schedule(k);
        u = -(stacked_gain(sc, pool, p_k, bc, margins.margin_for(p_k)) * x);
      }
      SaddleActions act{u.head(mc), u.tail(ma)};
      if (dev.side == DeviationSpec::Side::Controller)
        act.u_control += dev.scale * (dev_gain * x);
      else if (dev.side == DeviationSpec::Side::Attacker)
        act.u_attack += dev.scale * (dev_gain * x);

      Vector noise = gaussian_vector(w_factor, rng_noise);
      for (Eigen::Index i = 0; i < sc.dims.num_controllers; ++i)
        noise += sc.B[i] * gaussian_vector(v_factor, rng_noise);

      const Vector x_next = sc.A * x + bc * act.u_control + ba * act.u_attack + noise;
      const double stage = x_next.dot(sc.Q * x_next) + act.u_control.dot(sc.Rc * act.u_control) -
                           act.u_attack.dot(sc.Ra * act.u_attack);
      if (k >= cfg.burn_in) {
        acc += stage;
        ++counted;
      }
      if (record) {
        out.trace.states.push_back(x_next);
        out.trace.controls.push_back(act.u_control);
        out.trace.attacks.push_back(act.u_attack);
        out.trace.stage_costs.push_back(stage);
      }
      x = x_next;
      if (x.norm() > cfg.overflow_cap) {
        overflowed = true;
        break;
      }
    }
    if (overflowed) {
      ++out.report.overflow_runs;
      continue;
    }
    run_costs.push_back(acc / counted);
  }

  if (!run_costs.empty()) {
    double mean = 0.0;
    for (double c : run_costs) mean += c;
    mean /= run_costs.size();
    double var = 0.0;
    for (double c : run_costs) var += (c - mean) * (c - mean);
    out.report.empirical = mean;
    out.report.std_error =
        run_costs.size() > 1 ? std::sqrt(var / (run_costs.size() - 1.0) / run_costs.size())
                             : 0.0;
  }
  return out;
}

double analytic_finite_horizon_value(const Scenario& sc, const SamplePool& pool, int horizon,
                                     const Vector& x0) {
  if (horizon < 1) throw std::invalid_argument("analytic value: horizon must be >= 1");
  RiccatiIterates it = riccati_iterates(sc, pool, horizon);
  for (int k = 0; k < horizon; ++k) {
    if (k >= static_cast<int>(it.values.size()) || !it.membership_ok[k])
      throw ConcavityViolation("analytic value: iterate " + std::to_string(k) +
                               " leaves the concavity region");
  }
  if (static_cast<int>(it.values.size()) <= horizon)
    throw std::domain_error("analytic value: recursion stopped before the horizon");
  const Matrix noise = sc.noise_covariance();
  double tr = 0.0;
  for (int k = 0; k < horizon; ++k) tr += (it.values[k] * noise).trace();
  const Matrix lead = it.values[horizon] - sc.Q;
  return (x0.dot(lead * x0) + tr) / horizon;
}

DeviationReport deviation_test(const Scenario& sc, const SamplePool& pool,
                               const MgareSolution& solution, int horizon, int runs,
                               double scale, std::uint64_t seed) {
  if (!solution.exists())
    throw std::domain_error("deviation_test: solution verdict is not Exists");
  PolicySpec eq;
  eq.kind = PolicySpec::Kind::SteadyState;
  eq.P = solution.P_star;

  SimulationConfig cfg;
  cfg.horizon = horizon;
  cfg.runs = 1;
  cfg.record_trace = false;

  DeviationReport rep;
  std::vector<double> d_ctrl, d_att;
  for (int run = 0; run < runs; ++run) {
    cfg.seed = splitmix64(seed + run);  // shared across the three variants
    const double base = simulate(sc, pool, eq, cfg).report.empirical;
    DeviationSpec dc{DeviationSpec::Side::Controller, scale};
    DeviationSpec da{DeviationSpec::Side::Attacker, scale};
    d_ctrl.push_back(simulate(sc, pool, eq, cfg, dc).report.empirical - base);
    d_att.push_back(simulate(sc, pool, eq, cfg, da).report.empirical - base);
  }
  auto summarize = [&](const std::vector<double>& d, double& mean, double& se) {
    mean = 0.0;
    for (double v : d) mean += v;
    mean /= d.size();
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    se = d.size() > 1 ? std::sqrt(var / (d.size() - 1.0) / d.size()) : 0.0;
  };
  summarize(d_ctrl, rep.controller_delta, rep.controller_se);
  summarize(d_att, rep.attacker_delta, rep.attacker_se);
  return rep;
}

StabilityReport mean_square_stable(const Scenario& sc, const SamplePool& pool,
                                   const MgareSolution& solution) {
  if (!solution.exists())
    throw std::domain_error("mean_square_stable: solution verdict is not Exists");
  StabilityReport rep;
  rep.radius = spectral_radius(closed_loop_kron_mean(sc, pool, solution.P_star));
  rep.stable = rep.radius < 1.0;
  return rep;
}

}  // namespace mgare
