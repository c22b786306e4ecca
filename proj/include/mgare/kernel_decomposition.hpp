#pragma once

#include <stdexcept>

#include "mgare/matrix_ops.hpp"

namespace mgare {

/// Split of a PD matrix T relative to one controller-gain realization:
/// T = t_ker + t_zero with t_zero annihilating the gain (t_zero B^c = 0) and
/// t_ker keeping its left kernel (ker(t_ker B^c) = ker(t_ker)). Both parts
/// are PSD by construction.
struct KernelSplit {
  Matrix t_ker;
  Matrix t_zero;
  Matrix coupling;   // L = G(0:r, r:S)^T G_r^{-1}, with G = U T U^T
  OrderedSvd svd;    // of B^c Rc^{-1} (B^c)^T
  Eigen::Index rank = 0;
};

struct ZeroGainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Closed-form decomposition. Throws ZeroGainError when bc is exactly zero;
/// a nonzero bc whose weighted Gram matrix still falls below the rank cut is
/// reported with rank = 0, t_ker = 0 and t_zero = T.
KernelSplit kernel_split(const Matrix& T, const Matrix& bc, const Matrix& Rc,
                         double rank_tol = Tolerances::rank);

}  // namespace mgare
