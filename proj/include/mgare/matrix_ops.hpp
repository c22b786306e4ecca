#pragma once

#include <Eigen/Dense>

namespace mgare {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default tolerances used by the definiteness and ordering predicates.
struct Tolerances {
  static constexpr double symmetry = 1e-12;   // relative symmetry defect
  static constexpr double psd = 1e-10;        // relative PSD eigenvalue floor
  static constexpr double pd = 1e-10;         // relative PD eigenvalue floor
  static constexpr double loewner = 1e-9;     // relative Loewner-order slack
  static constexpr double rank = 1e-9;        // rank cut as a fraction of sigma_max
};

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& sym);
double spectral_norm(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = Tolerances::symmetry);
bool is_psd(const Matrix& m, double rel_tol = Tolerances::psd);
bool is_pd(const Matrix& m, double rel_tol = Tolerances::pd);

/// a (=< | <) b in the Loewner order, tested on min-eig(b - a) with a
/// scale-aware slack.
bool loewner_leq(const Matrix& a, const Matrix& b, double rel_tol = Tolerances::loewner);
bool loewner_lt(const Matrix& a, const Matrix& b, double rel_margin = Tolerances::pd);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major stacking.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index dim);

enum class SchurBlock { UpperLeft, LowerRight };

/// Schur complement of the designated block of a 2x2 partitioned matrix.
/// Block sizes are (n1, n - n1). Throws on a singular designated block.
Matrix schur_complement(const Matrix& m, Eigen::Index n1, SchurBlock which);

double spectral_radius(const Matrix& m);

/// Symmetric PSD square root. Throws if the input fails the PSD check.
Matrix psd_sqrt(const Matrix& m);

/// Eigendecomposition of a PSD matrix written as M = U^T diag(sigma) U with
/// sigma non-increasing and the rows of U orthonormal. The sign of each row
/// is fixed so its first non-negligible entry is positive, which makes the
/// factorization deterministic.
struct OrderedSvd {
  Matrix u;        // rows are the ordered eigenvectors
  Vector sigma;    // non-increasing, >= 0 up to the PSD tolerance
  Eigen::Index rank = 0;  // count of sigma_i > rank_tol * sigma_max
};

OrderedSvd ordered_svd(const Matrix& psd, double rank_tol = Tolerances::rank);

}  // namespace mgare
