#include "mgare/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace mgare {

namespace {

double pd_floor(const Matrix& m) { return Tolerances::pd * std::max(1.0, m.norm()); }

}  // namespace

Matrix ActionQuadratic::solve(const Matrix& rhs) const {
  const Eigen::Index mc = control_width();
  const Eigen::Index ma = attack_width();
  Eigen::LLT<Matrix> top(controller_block);
  if (top.info() != Eigen::Success)
    throw std::domain_error("action quadratic: controller block not positive definite");
  // Schur complement w.r.t. the controller block; negative definite inside
  // the concavity region.
  const Matrix cross_solved = top.solve(cross_block);  // mc x ma
  const Matrix neg_schur =
      symmetrized(attacker_margin + cross_block.transpose() * cross_solved);
  Eigen::LLT<Matrix> bottom(neg_schur);
  if (bottom.info() != Eigen::Success)
    throw std::domain_error("action quadratic: stacked matrix is singular or indefinite");

  const double cond_proxy =
      (top.matrixLLT().diagonal().cwiseAbs().maxCoeff() /
       std::max(1e-300, bottom.matrixLLT().diagonal().cwiseAbs().minCoeff()));
  if (cond_proxy * cond_proxy > 1e12)
    std::cerr << "mgare: warning: ill-conditioned action quadratic (cond ~ "
              << cond_proxy * cond_proxy << ")\n";

  const Matrix r1 = rhs.topRows(mc);
  const Matrix r2 = rhs.bottomRows(ma);
  const Matrix y2 = bottom.solve(cross_solved.transpose() * r1 - r2);
  const Matrix y1 = top.solve(r1 - cross_block * y2);
  Matrix out(mc + ma, rhs.cols());
  out.topRows(mc) = y1;
  out.bottomRows(ma) = y2;
  return out;
}

ActionQuadratic action_quadratic(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                                 const Matrix& bc_sample) {
  return action_quadratic(sc, pool, P, bc_sample,
                          symmetrized(sc.Ra - attacker_moments(pool, P).second_moment));
}

ActionQuadratic action_quadratic(const Scenario& sc, const SamplePool& pool, const Matrix& P,
                                 const Matrix& bc_sample, const Matrix& attacker_margin) {
  ActionQuadratic q;
  const Matrix& eba = pool.mean_ba();
  q.controller_block = symmetrized(bc_sample.transpose() * P * bc_sample + sc.Rc);
  q.cross_block = bc_sample.transpose() * P * eba;
  q.attacker_margin = attacker_margin;
  const Eigen::Index mc = q.control_width(), ma = q.attack_width();
  q.stacked.resize(mc + ma, mc + ma);
  q.stacked.topLeftCorner(mc, mc) = q.controller_block;
  q.stacked.topRightCorner(mc, ma) = q.cross_block;
  q.stacked.bottomLeftCorner(ma, mc) = q.cross_block.transpose();
  q.stacked.bottomRightCorner(ma, ma) = -q.attacker_margin;
  return q;
}

bool in_concavity_region(const Scenario& sc, const SamplePool& pool, const Matrix& P) {
  const Matrix margin = sc.Ra - attacker_moments(pool, P).second_moment;
  return min_eigenvalue(margin) > pd_floor(sc.Ra);
}

Matrix riccati_operator(const Scenario& sc, const SamplePool& pool, const Matrix& P) {
  const Matrix margin = symmetrized(sc.Ra - attacker_moments(pool, P).second_moment);
  if (min_eigenvalue(margin) <= pd_floor(sc.Ra))
    throw ConcavityViolation("riccati_operator: attacker margin lost positive definiteness");

  const Matrix& eba = pool.mean_ba();
  const Eigen::Index ma = eba.cols();
  const Matrix cross_base = P * eba;  // shared across atoms

  Matrix acc = expect_over_bc(pool, [&](const Matrix& bc) {
    const Eigen::Index mc = bc.cols();
    ActionQuadratic q;
    q.controller_block = symmetrized(bc.transpose() * P * bc + sc.Rc);
    q.cross_block = bc.transpose() * cross_base;
    q.attacker_margin = margin;
    Matrix bp(mc + ma, P.rows());  // B(k)^T P
    bp.topRows(mc) = bc.transpose() * P;
    bp.bottomRows(ma) = cross_base.transpose();
    const Matrix x = q.solve(bp);
    return Matrix(P - bp.transpose() * x);
  });
  return symmetrized(sc.A.transpose() * acc * sc.A + sc.Q);
}

RiccatiIterates riccati_iterates(const Scenario& sc, const SamplePool& pool, int horizon,
                                 double divergence_cap) {
  if (horizon < 0) throw std::invalid_argument("riccati_iterates: horizon must be >= 0");
  RiccatiIterates out;
  out.values.push_back(sc.Q);
  out.membership_ok.push_back(in_concavity_region(sc, pool, sc.Q) ? 1 : 0);
  for (int k = 0; k < horizon; ++k) {
    if (!out.membership_ok.back()) {
      out.stopped_early = true;
      break;
    }
    Matrix next = riccati_operator(sc, pool, out.values.back());
    out.values.push_back(std::move(next));
    out.membership_ok.push_back(in_concavity_region(sc, pool, out.values.back()) ? 1 : 0);
    if (out.values.back().norm() > divergence_cap) {
      out.stopped_early = true;
      break;
    }
  }
  return out;
}

const char* to_string(SolveVerdict v) {
  switch (v) {
    case SolveVerdict::Exists: return "Exists";
    case SolveVerdict::Diverged: return "Diverged";
    case SolveVerdict::ConcavityViolated: return "ConcavityViolated";
    case SolveVerdict::Undecided: return "UndecidedAtKmax";
  }
  return "?";
}

MgareSolution solve_mgare(const Scenario& sc, const SamplePool& pool, const SolveOptions& opt) {
  MgareSolution sol;
  Matrix p = sc.Q;
  auto note = [&](const Matrix& m, bool member) {
    if (opt.keep_trajectory) {
      sol.trajectory_norms.push_back(m.norm());
      sol.membership_ok.push_back(member ? 1 : 0);
    }
  };

  bool member = in_concavity_region(sc, pool, p);
  note(p, member);
  if (!member) {
    sol.P_star = p;
    sol.verdict = SolveVerdict::ConcavityViolated;
    sol.failure_step = 0;
    return sol;
  }

  for (int k = 0; k < opt.k_max; ++k) {
    Matrix next;
    try {
      next = riccati_operator(sc, pool, p);
    } catch (const ConcavityViolation&) {
      sol.P_star = p;
      sol.verdict = SolveVerdict::ConcavityViolated;
      sol.failure_step = k;
      return sol;
    }
    sol.iterations = k + 1;
    member = in_concavity_region(sc, pool, next);
    note(next, member);
    if (next.norm() > opt.divergence_cap) {
      sol.P_star = next;
      sol.verdict = SolveVerdict::Diverged;
      sol.failure_step = k + 1;
      return sol;
    }
    const double change = (next - p).norm() / (1.0 + p.norm());
    p = std::move(next);
    if (!member) {
      sol.P_star = p;
      sol.verdict = SolveVerdict::ConcavityViolated;
      sol.failure_step = k + 1;
      return sol;
    }
    if (change < opt.tol) {
      sol.P_star = p;
      sol.residual = (riccati_operator(sc, pool, p) - p).norm() / std::max(1e-300, p.norm());
      const bool members_ok =
          !opt.keep_trajectory ||
          std::all_of(sol.membership_ok.begin(), sol.membership_ok.end(),
                      [](char c) { return c != 0; });
      sol.verdict = (sol.residual <= std::max(opt.tol * 10.0, 1e-12) && members_ok)
                        ? SolveVerdict::Exists
                        : SolveVerdict::Undecided;
      return sol;
    }
  }
  sol.P_star = p;
  sol.verdict = SolveVerdict::Undecided;
  sol.failure_step = opt.k_max;
  return sol;
}

double game_value(const Scenario& sc, const MgareSolution& sol) {
  if (!sol.exists()) throw std::domain_error("game_value: no fixed point (verdict not Exists)");
  return (sol.P_star * sc.noise_covariance()).trace();
}

}  // namespace mgare
