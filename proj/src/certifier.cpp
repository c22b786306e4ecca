#include "mgare/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mgare {

namespace {

Matrix inverse_pd(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(symmetrized(m));
  if (llt.info() != Eigen::Success)
    throw std::domain_error(std::string(what) + ": matrix not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

Matrix control_only_riccati_step(const Scenario& sc, const SamplePool& pool, const Matrix& T) {
  const Matrix t_inv = inverse_pd(T, "control_only_riccati_step");
  Eigen::LLT<Matrix> rc(sc.Rc);
  if (rc.info() != Eigen::Success)
    throw std::domain_error("control_only_riccati_step: Rc not positive definite");
  Matrix acc = expect_over_bc(pool, [&](const Matrix& bc) {
    const Matrix gram = symmetrized(bc * rc.solve(bc.transpose()));
    Eigen::LLT<Matrix> inner(symmetrized(gram + t_inv));
    if (inner.info() != Eigen::Success)
      throw std::domain_error("control_only_riccati_step: inner matrix not positive definite");
    return Matrix(inner.solve(Matrix::Identity(T.rows(), T.cols())));
  });
  return symmetrized(sc.A.transpose() * acc * sc.A);
}

bool contraction_inequality_holds(const Scenario& sc, const SamplePool& pool, const Matrix& T) {
  const Matrix gap = T - control_only_riccati_step(sc, pool, T) - sc.Q;
  return min_eigenvalue(gap) > 1e-10 * T.norm();
}

UncontrolledSpectrum uncontrolled_spectrum(const Scenario& sc, const SamplePool& pool,
                                           double xi) {
  if (!(xi > 0.0)) throw std::invalid_argument("uncontrolled_spectrum: xi must be positive");
  const Eigen::Index s = sc.dims.state;
  Eigen::LLT<Matrix> rc(sc.Rc);
  UncontrolledSpectrum out;
  out.kron_mean = Matrix::Zero(s * s, s * s);
  for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i) {
    const double w = pool.bc.weights[i];
    const Matrix& bc = pool.bc.atoms[i];
    const OrderedSvd svd = ordered_svd(symmetrized(bc * rc.solve(bc.transpose())));
    const Eigen::Index r = svd.rank;
    if (r > 0) {
      const double sigma_min = svd.sigma(r - 1);
      if (sigma_min <= xi) {
        out.gate_prob += w;
      } else {
        double tr = 0.0;
        for (Eigen::Index k = 0; k < r; ++k) tr += 1.0 / svd.sigma(k);
        out.gated_trace += w * tr;
      }
    }
    Matrix proj;
    if (r == 0) {
      proj = Matrix::Identity(s, s);
    } else if (r == s) {
      continue;  // fully controllable atom: null projector, no contribution
    } else {
      const Matrix null_rows = svd.u.bottomRows(s - r);
      proj = null_rows.transpose() * null_rows;
    }
    const Matrix pa = proj * sc.A;
    out.kron_mean += w * kron(pa, pa);
  }
  out.radius = spectral_radius(out.kron_mean);
  out.radius_with_gate =
      spectral_radius(Matrix(out.kron_mean + out.gate_prob * kron(sc.A, sc.A)));
  return out;
}

double uncontrolled_kron_radius(const Scenario& sc, const SamplePool& pool, double xi) {
  return uncontrolled_spectrum(sc, pool, xi).radius;
}

Vector resolvent_solve(const Matrix& map, const Vector& b, bool direct) {
  if (direct) {
    const Eigen::Index n = map.rows();
    return (Matrix::Identity(n, n) - map).partialPivLu().solve(b);
  }
  // Neumann accumulation; converges because the radius is below one.
  Vector x = b;
  Vector term = b;
  for (int k = 0; k < 100000; ++k) {
    term = map * term;
    x += term;
    if (term.norm() <= 1e-16 * x.norm()) break;
  }
  return x;
}

double default_xi(const Scenario& sc, const SamplePool& pool) {
  Eigen::LLT<Matrix> rc(sc.Rc);
  std::vector<double> smallest;
  for (const Matrix& bc : pool.bc.atoms) {
    const OrderedSvd svd = ordered_svd(symmetrized(bc * rc.solve(bc.transpose())));
    if (svd.rank > 0) smallest.push_back(svd.sigma(svd.rank - 1));
  }
  if (smallest.empty()) return 1e-12;
  std::sort(smallest.begin(), smallest.end());
  if (pool.bc.exact) return 0.5 * smallest.front();
  const std::size_t q = smallest.size() / 100;  // 1% quantile
  return 0.5 * smallest[q];
}

LyapunovCertificate solve_certificate_lyapunov(const Scenario& sc, const SamplePool& pool,
                                               double xi) {
  const Eigen::Index s = sc.dims.state;
  LyapunovCertificate out;
  out.spectrum = uncontrolled_spectrum(sc, pool, xi);
  if (out.spectrum.radius_with_gate >= 1.0 - 1e-9)
    throw SpectralRadiusError("solve_certificate_lyapunov: linearized map radius " +
                              std::to_string(out.spectrum.radius_with_gate) + " >= 1");

  // Transposed so that unvec(map * vec(T)) equals
  //   p_gate A^T T A + E[(U~^T U~ A)^T T (U~^T U~ A)].
  const Matrix map =
      (out.spectrum.kron_mean + out.spectrum.gate_prob * kron(sc.A, sc.A)).transpose();
  const double rhs = spectral_norm(sc.A) * spectral_norm(sc.A) *
                     spectral_norm(Matrix(out.spectrum.gated_trace *
                                              Matrix::Identity(s, s) + sc.Q));
  const Vector b = rhs * vec(Matrix::Identity(s, s));

  const Vector x = resolvent_solve(map, b, /*direct=*/s * s <= 4096);
  out.T = symmetrized(unvec(x, s));
  out.residual = (map * vec(out.T) + b - vec(out.T)).norm() / vec(out.T).norm();
  if (!is_pd(out.T))
    throw SpectralRadiusError("solve_certificate_lyapunov: certificate lost definiteness");
  return out;
}

Matrix strict_supersolution(const SamplePool& pool, const Matrix& T, const Matrix& Ra,
                            double tol, int n_max) {
  const Matrix t_inv = inverse_pd(T, "strict_supersolution");
  const Matrix& eba = pool.mean_ba();
  Matrix x = T;
  for (int n = 0; n < n_max; ++n) {
    const Matrix cov = attacker_moments(pool, x).cov_term;
    const Matrix gap = symmetrized(Ra - cov);
    if (min_eigenvalue(gap) <= 0.0)
      throw SupersolutionError("strict_supersolution: attacker margin lost definiteness");
    const Matrix mid = inverse_pd(gap, "strict_supersolution");
    const Matrix next_inv = symmetrized(eba * mid * eba.transpose() + t_inv);
    const Matrix next = inverse_pd(next_inv, "strict_supersolution");
    const double change = (next - x).norm() / (1.0 + x.norm());
    x = next;
    if (change < tol) return x;
  }
  throw SupersolutionError("strict_supersolution: no convergence after " +
                           std::to_string(n_max) + " iterations");
}

AttackerWeightBound attacker_weight_bound(const Scenario& sc, const SamplePool& pool,
                                          const Matrix& T, double rel_margin,
                                          double abs_floor) {
  const Matrix g = control_only_riccati_step(sc, pool, T);
  const Matrix d = symmetrized(inverse_pd(Matrix(g + sc.Q), "attacker_weight_bound") -
                               inverse_pd(T, "attacker_weight_bound"));
  if (min_eigenvalue(d) <= 0.0)
    throw std::domain_error("attacker_weight_bound: (E[g(T)]+Q)^{-1} - T^{-1} not PD");
  const Matrix& eba = pool.mean_ba();
  const Eigen::Index ma = eba.cols();
  AttackerWeightBound out;
  out.bound = symmetrized(eba.transpose() * inverse_pd(d, "attacker_weight_bound") * eba +
                          sigma2_ba(pool) * T.trace() * Matrix::Identity(ma, ma));
  const double margin = std::max(rel_margin * spectral_norm(out.bound), abs_floor);
  out.chosen = out.bound + margin * Matrix::Identity(ma, ma);
  return out;
}

const char* to_string(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::Certified: return "Certified";
    case CertifyStatus::RadiusTooLarge: return "ConditionFailed(rho_kron)";
    case CertifyStatus::ContractionFailed: return "ConditionFailed(gT_condition)";
    case CertifyStatus::WeightBoundFailed: return "ConditionFailed(ra_bound)";
    case CertifyStatus::SupersolutionFailed: return "ConditionFailed(p_tilde)";
    case CertifyStatus::DescentFailed: return "ConditionFailed(mnmi)";
    case CertifyStatus::MembershipFailed: return "ConditionFailed(membership)";
  }
  return "?";
}

Certificate certify(const Scenario& sc, const SamplePool& pool, const CertifyOptions& opt) {
  Certificate cert;
  cert.xi = opt.xi.value_or(default_xi(sc, pool));

  LyapunovCertificate lyap;
  try {
    lyap = solve_certificate_lyapunov(sc, pool, cert.xi);
  } catch (const SpectralRadiusError&) {
    cert.rho_kron = uncontrolled_spectrum(sc, pool, cert.xi).radius;
    cert.status = CertifyStatus::RadiusTooLarge;
    return cert;
  }
  cert.rho_kron = lyap.spectrum.radius;
  cert.T_star = lyap.T;
  cert.lyapunov_residual = lyap.residual;

  cert.contraction_ok = contraction_inequality_holds(sc, pool, lyap.T);
  if (!cert.contraction_ok) {
    cert.status = CertifyStatus::ContractionFailed;
    return cert;
  }

  AttackerWeightBound bound;
  try {
    bound = attacker_weight_bound(sc, pool, lyap.T, opt.ra_margin, opt.ra_floor);
  } catch (const std::domain_error&) {
    cert.status = CertifyStatus::WeightBoundFailed;
    return cert;
  }
  cert.Ra_bound = bound.bound;

  // The trace term of the weight bound can understate the covariance of a
  // correlated attacker gain, so the margin escalates until the
  // supersolution stage goes through (a larger weight certifies a strictly
  // easier claim).
  const Eigen::Index ma = bound.bound.rows();
  double margin = std::max(opt.ra_margin * spectral_norm(bound.bound), opt.ra_floor);
  for (int attempt = 0; attempt < 5; ++attempt, margin *= 10.0) {
    const Matrix chosen = bound.bound + margin * Matrix::Identity(ma, ma);
    cert.Ra_chosen = chosen;
    const Scenario armed = sc.with_attacker_weight(chosen);
    Matrix p_tilde;
    try {
      p_tilde = strict_supersolution(pool, lyap.T, chosen);
    } catch (const SupersolutionError&) {
      cert.status = CertifyStatus::SupersolutionFailed;
      continue;
    }
    cert.P_tilde = p_tilde;

    cert.membership_ok = in_concavity_region(armed, pool, p_tilde);
    if (!cert.membership_ok) {
      cert.status = CertifyStatus::MembershipFailed;
      continue;
    }
    const Matrix f_p = riccati_operator(armed, pool, p_tilde);
    cert.descent_ok = loewner_lt(f_p, p_tilde);
    cert.status = cert.descent_ok ? CertifyStatus::Certified : CertifyStatus::DescentFailed;
    if (cert.certified()) return cert;
  }
  return cert;
}

namespace {

std::vector<double> transmitter_gate_probs(const ChannelGrid& grid) {
  std::vector<double> probs;
  for (const auto& row : grid.models) {
    double p = -1.0;
    for (const auto& m : row) {
      if (!m.gated()) continue;
      if (p < 0.0) p = m.gate_prob();
      else if (std::abs(p - m.gate_prob()) > 1e-12)
        throw StructureMismatch("example: per-transmitter gate probabilities differ");
    }
    probs.push_back(p < 0.0 ? 1.0 : p);
  }
  return probs;
}

void require_structure(bool ok, const std::string& what) {
  if (!ok) throw StructureMismatch("example: " + what);
}

double conditional_gain_trace(const Scenario& sc, const SamplePool& pool) {
  // E[ Tr(Sigma_r^{-1}) | r != 0 ], the gate-independent factor of the
  // shared-gate family's trace term.
  Eigen::LLT<Matrix> rc(sc.Rc);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i) {
    const OrderedSvd svd =
        ordered_svd(symmetrized(pool.bc.atoms[i] * rc.solve(pool.bc.atoms[i].transpose())));
    if (svd.rank == 0) continue;
    double tr = 0.0;
    for (Eigen::Index k = 0; k < svd.rank; ++k) tr += 1.0 / svd.sigma(k);
    num += pool.bc.weights[i] * tr;
    den += pool.bc.weights[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

double unconditional_gain_trace(const Scenario& sc, const SamplePool& pool) {
  Eigen::LLT<Matrix> rc(sc.Rc);
  double num = 0.0;
  for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i) {
    const OrderedSvd svd =
        ordered_svd(symmetrized(pool.bc.atoms[i] * rc.solve(pool.bc.atoms[i].transpose())));
    if (svd.rank == 0) continue;
    double tr = 0.0;
    for (Eigen::Index k = 0; k < svd.rank; ++k) tr += 1.0 / svd.sigma(k);
    num += pool.bc.weights[i] * tr;
  }
  return num;
}

Matrix solve_damped_lyapunov(const Matrix& a_kron, const Matrix& rhs) {
  const Eigen::Index s = rhs.rows();
  const Matrix lhs = Matrix::Identity(s * s, s * s) - a_kron;
  return symmetrized(unvec(lhs.partialPivLu().solve(vec(rhs)), s));
}

}  // namespace

double example1_necessary_ra_scale(const Scenario& sc, double delta) {
  const double rho = spectral_radius(sc.A);
  const double eps = 1.0 - (1.0 - delta) * rho * rho;
  if (eps <= 0.0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sc.A));
  const Matrix v = es.eigenvectors();
  const double smin = Matrix(v.transpose() * sc.Q * v).jacobiSvd().singularValues().minCoeff();
  return smin * rho * rho / (eps * eps);
}

ExampleConditions example_conditions(const Scenario& sc, const SamplePool& pool,
                                     ExampleKind kind, double gamma2) {
  ExampleConditions out;
  out.kind = kind;
  const Eigen::Index s = sc.dims.state;
  const double rho = spectral_radius(sc.A);
  out.deltas = transmitter_gate_probs(sc.controller_channels);

  if (kind == ExampleKind::Example1) {
    require_structure(is_symmetric(sc.A, 1e-9), "state matrix must be symmetric");
    require_structure(sc.controller_channels.coupling == GateCoupling::Shared,
                      "controller gates must be shared");
    require_structure(sc.dims.control_width() >= s, "need tx_controller * |N^c| >= S");
    require_structure(sc.dims.attack_width() >= s, "need tx_attacker * |N^a| >= S");
    for (const auto& row : sc.controller_channels.models)
      for (const auto& m : row) require_structure(m.gated(), "all controller links gated");
    const double delta = out.deltas.at(0);
    out.delta_threshold = 1.0 - 1.0 / (rho * rho);
    out.radius_closed_form = (1.0 - delta) * rho * rho;
    out.threshold_ok = delta > out.delta_threshold;
    if (out.threshold_ok) {
      const double ebar = delta * conditional_gain_trace(sc, pool);
      const double eps = 1.0 - out.radius_closed_form;
      const double scale =
          (1.0 + gamma2) / eps *
          spectral_norm(Matrix(ebar * Matrix::Identity(s, s) + sc.Q));
      out.T_star_closed_form = scale * Matrix::Identity(s, s);
    }
    const bool a_invertible =
        sc.A.fullPivLu().isInvertible();
    Eigen::JacobiSVD<Matrix> eba_svd(pool.mean_ba());
    const Eigen::Index eba_rank =
        (eba_svd.singularValues().array() >
         1e-9 * eba_svd.singularValues().maxCoeff()).count();
    out.necessary_applicable = a_invertible && eba_rank == s;
    out.necessary_ra_scale = example1_necessary_ra_scale(sc, delta);
    return out;
  }

  if (kind == ExampleKind::Example2) {
    const Eigen::Index m = sc.dims.num_controllers;
    const Eigen::Index n = sc.dims.rx_antennas;
    require_structure(sc.dims.num_attackers == m, "need |N^c| = |N^a|");
    require_structure(sc.dims.tx_controller == n, "need N_t^c = N_r");
    require_structure(s == m * n, "need S = |N^c| * N_r");
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        const ChannelModel& link = sc.controller_channels.models[j][i];
        if (i == j) {
          require_structure(link.gated(), "diagonal links must be gated");
        } else {
          const auto* fs = std::get_if<FiniteSupport>(&link.law);
          require_structure(fs && fs->atoms.size() == 1 && fs->atoms[0].isZero(1e-14),
                            "off-diagonal links must be deterministically zero");
        }
      }
    Matrix damp = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < m; ++i)
      damp.block(i * n, i * n, n, n) =
          std::sqrt(1.0 - out.deltas[i]) * Matrix::Identity(n, n);
    const Matrix a1 = damp * sc.A;
    const double rho_a1 = spectral_radius(a1);
    out.delta_threshold = 1.0 - 1.0 / (rho * rho);
    out.radius_closed_form = rho_a1 * rho_a1;
    out.threshold_ok = rho_a1 < 1.0;
    if (out.threshold_ok) {
      const double ebar = unconditional_gain_trace(sc, pool);
      const Matrix rhs = spectral_norm(sc.A) * spectral_norm(sc.A) * ebar *
                             Matrix::Identity(s, s) + sc.Q;
      out.T_star_closed_form =
          solve_damped_lyapunov(kron(a1.transpose(), a1.transpose()), rhs);
    }
    return out;
  }

  // Example 3: per-transmitter gating with jointly full-row-rank gains.
  const Eigen::Index m = sc.dims.num_controllers;
  require_structure(sc.dims.num_attackers == m, "need |N^c| = |N^a|");
  require_structure(sc.dims.tx_controller >= m * sc.dims.rx_antennas &&
                        m * sc.dims.rx_antennas >= s,
                    "need N_t^c >= |N^c| N_r >= S");
  require_structure(sc.controller_channels.coupling == GateCoupling::PerTransmitter,
                    "controller gates must couple per transmitter");
  for (const auto& row : sc.controller_channels.models)
    for (const auto& link : row) require_structure(link.gated(), "all controller links gated");
  double prod = 1.0;
  for (double d : out.deltas) prod *= (1.0 - d);
  out.delta_threshold = 1.0 - std::pow(rho, -2.0 / static_cast<double>(m));
  out.radius_closed_form = prod * rho * rho;
  out.threshold_ok = out.radius_closed_form < 1.0;
  if (out.threshold_ok) {
    const double ebar = unconditional_gain_trace(sc, pool);
    const Matrix rhs = spectral_norm(sc.A) * spectral_norm(sc.A) * ebar *
                           Matrix::Identity(s, s) + sc.Q;
    out.T_star_closed_form = solve_damped_lyapunov(
        Matrix(prod * kron(sc.A.transpose(), sc.A.transpose())), rhs);
  }
  return out;
}

std::vector<TraceBounds> example1_trace_bounds(const Scenario& sc, const SamplePool& pool,
                                               const std::vector<double>& delta_grid,
                                               double gamma2) {
  const Eigen::Index s = sc.dims.state;
  const double rho = spectral_radius(sc.A);
  const double delta_star = 1.0 - 1.0 / (rho * rho);
  const double cond_trace = conditional_gain_trace(sc, pool);
  const Matrix at_kron = kron(sc.A.transpose(), sc.A.transpose());

  std::vector<TraceBounds> out;
  out.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    TraceBounds tb;
    tb.delta = delta;
    if (delta <= delta_star) {
      tb.lower = tb.upper = std::numeric_limits<double>::infinity();
      out.push_back(tb);
      continue;
    }
    const Matrix low = solve_damped_lyapunov(Matrix((1.0 - delta) * at_kron), sc.Q);
    tb.lower = low.trace();
    const double eps = 1.0 - (1.0 - delta) * rho * rho;
    const double ebar = delta * cond_trace;
    tb.upper = static_cast<double>(s) * (1.0 + gamma2) / eps *
               spectral_norm(Matrix(ebar * Matrix::Identity(s, s) + sc.Q));
    out.push_back(tb);
  }
  return out;
}

}  // namespace mgare
