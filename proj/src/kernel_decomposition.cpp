#include "mgare/kernel_decomposition.hpp"

#include <stdexcept>

namespace mgare {

KernelSplit kernel_split(const Matrix& T, const Matrix& bc, const Matrix& Rc,
                         double rank_tol) {
  if (!is_pd(T)) throw std::domain_error("kernel_split: T must be positive definite");
  if (bc.rows() != T.rows())
    throw std::invalid_argument("kernel_split: gain/T dimension mismatch");
  if (bc.isZero(0.0)) throw ZeroGainError("kernel_split: zero controller gain");

  const Eigen::Index s = T.rows();
  Eigen::LLT<Matrix> rc(Rc);
  if (rc.info() != Eigen::Success)
    throw std::domain_error("kernel_split: Rc must be positive definite");

  KernelSplit out;
  // The rank is read off the weighted Gram matrix, not off bc itself.
  out.svd = ordered_svd(symmetrized(bc * rc.solve(bc.transpose())), rank_tol);
  const Eigen::Index r = out.svd.rank;
  out.rank = r;
  if (r == 0) {
    out.t_ker = Matrix::Zero(s, s);
    out.t_zero = T;
    out.coupling = Matrix::Zero(0, 0);
    return out;
  }

  const Matrix& u = out.svd.u;
  const Matrix g = symmetrized(u * T * u.transpose());
  const Matrix g_r = g.topLeftCorner(r, r);       // PD because T is PD
  const Matrix g_tr = g.topRightCorner(r, s - r);
  Eigen::LLT<Matrix> g_r_llt(g_r);
  if (g_r_llt.info() != Eigen::Success)
    throw std::domain_error("kernel_split: leading block of U T U^T not positive definite");
  out.coupling = g_tr.transpose() * g_r_llt.solve(Matrix::Identity(r, r));

  Matrix ker_block(s, s);
  ker_block.topLeftCorner(r, r) = g_r;
  ker_block.topRightCorner(r, s - r) = g_tr;
  ker_block.bottomLeftCorner(s - r, r) = g_tr.transpose();
  ker_block.bottomRightCorner(s - r, s - r) = g_tr.transpose() * g_r_llt.solve(g_tr);

  Matrix zero_block = Matrix::Zero(s, s);
  zero_block.bottomRightCorner(s - r, s - r) =
      g.bottomRightCorner(s - r, s - r) - g_tr.transpose() * g_r_llt.solve(g_tr);

  out.t_ker = symmetrized(u.transpose() * ker_block * u);
  out.t_zero = symmetrized(u.transpose() * zero_block * u);
  return out;
}

}  // namespace mgare
