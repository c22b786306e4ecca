#include "mgare/matrix_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace mgare {

double min_eigenvalue(const Matrix& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

bool is_psd(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m, 1e-9)) return false;
  return min_eigenvalue(m) >= -rel_tol * std::max(1.0, m.norm());
}

bool is_pd(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m, 1e-9)) return false;
  if (m.rows() == 0) return true;
  return min_eigenvalue(m) > rel_tol * std::max(1.0, m.norm());
}

bool loewner_leq(const Matrix& a, const Matrix& b, double rel_tol) {
  const Matrix d = symmetrized(b - a);
  return min_eigenvalue(d) >= -rel_tol * (1.0 + b.norm());
}

bool loewner_lt(const Matrix& a, const Matrix& b, double rel_margin) {
  const Matrix d = symmetrized(b - a);
  return min_eigenvalue(d) > rel_margin * std::max(1.0, b.norm());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim)
    throw std::invalid_argument("unvec: vector length " + std::to_string(v.size()) +
                                " does not match dim^2 = " + std::to_string(dim * dim));
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix schur_complement(const Matrix& m, Eigen::Index n1, SchurBlock which) {
  if (m.rows() != m.cols()) throw std::invalid_argument("schur_complement: matrix not square");
  if (n1 <= 0 || n1 >= m.rows())
    throw std::invalid_argument("schur_complement: block split out of range");
  const Eigen::Index n2 = m.rows() - n1;
  const Matrix a1 = m.topLeftCorner(n1, n1);
  const Matrix a2 = m.topRightCorner(n1, n2);
  const Matrix a3 = m.bottomLeftCorner(n2, n1);
  const Matrix a4 = m.bottomRightCorner(n2, n2);
  if (which == SchurBlock::UpperLeft) {
    Eigen::FullPivLU<Matrix> lu(a1);
    if (!lu.isInvertible()) throw std::domain_error("schur_complement: upper-left block singular");
    return a4 - a3 * lu.solve(a2);
  }
  Eigen::FullPivLU<Matrix> lu(a4);
  if (!lu.isInvertible()) throw std::domain_error("schur_complement: lower-right block singular");
  return a1 - a2 * lu.solve(a3);
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix psd_sqrt(const Matrix& m) {
  if (!is_psd(m)) throw std::domain_error("psd_sqrt: input is not positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  Vector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

OrderedSvd ordered_svd(const Matrix& psd, double rank_tol) {
  if (!is_psd(psd)) throw std::domain_error("ordered_svd: input is not positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(psd));
  const Eigen::Index n = psd.rows();

  OrderedSvd out;
  out.u.resize(n, n);
  out.sigma.resize(n);
  // SelfAdjointEigenSolver returns ascending eigenvalues; reverse them.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.sigma(i) = std::max(0.0, es.eigenvalues()(n - 1 - i));
    out.u.row(i) = es.eigenvectors().col(n - 1 - i).transpose();
  }
  // Deterministic sign: first non-negligible entry of each eigenvector positive.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = out.u(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) out.u.row(i) = -out.u.row(i);
        break;
      }
    }
  }
  const double cut = rank_tol * (out.sigma.size() > 0 ? out.sigma(0) : 0.0);
  out.rank = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (out.sigma(i) > cut) ++out.rank;
  return out;
}

}  // namespace mgare
