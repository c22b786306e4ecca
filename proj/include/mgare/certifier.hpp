#pragma once

#include <optional>
#include <vector>

#include "mgare/riccati.hpp"
#include "mgare/sample_pool.hpp"

namespace mgare {

/// One Riccati step of the attacker-free game without the state-cost term:
///   E[ A^T (B^c Rc^{-1} (B^c)^T + T^{-1})^{-1} A ].
Matrix control_only_riccati_step(const Scenario& sc, const SamplePool& pool, const Matrix& T);

/// Strict contraction test: control_only_riccati_step(T) + Q < T with a
/// scale-aware margin.
bool contraction_inequality_holds(const Scenario& sc, const SamplePool& pool, const Matrix& T);

/// Per-atom spectral data of B^c Rc^{-1} (B^c)^T used by the certifier.
struct UncontrolledSpectrum {
  Matrix kron_mean;       // E[(U~^T U~ A) x (U~^T U~ A)], U~ the null-space rows
  double radius = 0.0;    // spectral radius of kron_mean
  double gate_prob = 0.0; // Pr(r != 0 and sigma_min(retained) <= xi)
  double gated_trace = 0.0;  // E[ 1{r != 0, Sigma_r > xi I} Tr(Sigma_r^{-1}) ]
  double radius_with_gate = 0.0;  // spectral radius of the full linearized map
};

UncontrolledSpectrum uncontrolled_spectrum(const Scenario& sc, const SamplePool& pool, double xi);

/// Spectral radius of the expected Kronecker map of the uncontrollable
/// projection, the verifiable contraction condition.
double uncontrolled_kron_radius(const Scenario& sc, const SamplePool& pool, double xi);

/// Default xi: half the smallest retained singular value across atoms for
/// exact pools, half the 1% quantile for sampled pools.
double default_xi(const Scenario& sc, const SamplePool& pool);

struct SpectralRadiusError : std::domain_error {
  using std::domain_error::domain_error;
};

/// (I - map)^{-1} b, by direct factorization or by Neumann accumulation when
/// the map is too large to factor densely. Requires spectral radius < 1 for
/// the iterative path.
Vector resolvent_solve(const Matrix& map, const Vector& b, bool direct);

/// Solves the generalized Lyapunov fixed point
///   T = p_gate A^T T A + E[(U~^T U~ A)^T T (U~^T U~ A)] + rhs I
/// by vectorization; rhs = ||A||^2 ||gated_trace I + Q||. Throws
/// SpectralRadiusError when the linearized map is not a contraction.
struct LyapunovCertificate {
  Matrix T;
  double residual = 0.0;  // ||A~ vec(T) + vec(rhs) - vec(T)|| / ||vec(T)||
  UncontrolledSpectrum spectrum;
};

LyapunovCertificate solve_certificate_lyapunov(const Scenario& sc, const SamplePool& pool,
                                               double xi);

struct SupersolutionError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Solves the implicit equation
///   P^{-1} = E[B^a] (Ra - cov_term(P))^{-1} E[B^a]^T + T^{-1}
/// by fixed-point iteration from P = T. The result is a strict supersolution
/// candidate of the Riccati map when (T, Ra) come from a valid certificate.
Matrix strict_supersolution(const SamplePool& pool, const Matrix& T, const Matrix& Ra,
                            double tol = 1e-12, int n_max = 500);

/// Feasible-attacker-weight bound:
///   E[B^a]^T ((E[g(T)]+Q)^{-1} - T^{-1})^{-1} E[B^a] + sigma2 Tr(T) I,
/// plus a scale-aware margin for the chosen weight.
struct AttackerWeightBound {
  Matrix bound;
  Matrix chosen;  // bound + margin I
};

AttackerWeightBound attacker_weight_bound(const Scenario& sc, const SamplePool& pool,
                                          const Matrix& T, double rel_margin = 1e-3,
                                          double abs_floor = 1e-6);

enum class CertifyStatus {
  Certified,
  RadiusTooLarge,
  ContractionFailed,
  WeightBoundFailed,
  SupersolutionFailed,
  DescentFailed,     // f(P~) < P~ does not hold
  MembershipFailed,  // P~ outside the concavity region
};

const char* to_string(CertifyStatus s);

struct Certificate {
  double rho_kron = 0.0;   // contraction-radius value
  double xi = 0.0;
  std::optional<Matrix> T_star;
  std::optional<Matrix> P_tilde;
  Matrix Ra_bound;
  Matrix Ra_chosen;
  bool contraction_ok = false;  // g(T*) + Q < T*
  bool descent_ok = false;      // f(P~) < P~
  bool membership_ok = false;   // P~ in the concavity region
  double lyapunov_residual = 0.0;
  CertifyStatus status = CertifyStatus::RadiusTooLarge;

  bool certified() const { return status == CertifyStatus::Certified; }
};

struct CertifyOptions {
  std::optional<double> xi;   // default: default_xi(sc, pool)
  double ra_margin = 1e-3;
  double ra_floor = 1e-6;
};

/// Full constructive pipeline: contraction radius, Lyapunov certificate T*,
/// feasible attacker weight, strict supersolution, descent and membership
/// checks. The verdict encodes the first failing stage.
Certificate certify(const Scenario& sc, const SamplePool& pool, const CertifyOptions& opt = {});

enum class ExampleKind { Example1 = 1, Example2 = 2, Example3 = 3 };

struct StructureMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Closed forms available for the example scenario families.
struct ExampleConditions {
  ExampleKind kind;
  std::vector<double> deltas;     // per-transmitter activation probabilities
  double delta_threshold = 0.0;   // critical common activation probability
  double radius_closed_form = 0.0;
  bool threshold_ok = false;
  Matrix T_star_closed_form;      // family-specific Lyapunov certificate
  bool necessary_applicable = false;  // A invertible and rank(E[B^a]) = S
  double necessary_ra_scale = 0.0;    // computable part of the necessary weight bound
};

ExampleConditions example_conditions(const Scenario& sc, const SamplePool& pool,
                                     ExampleKind kind, double gamma2 = 1.0);

/// Trace bounds on the minimal solution for the shared-gate family, per
/// activation probability: the lower bound solves X = (1-delta) A^T X A + Q;
/// the upper bound is the trace of the scalar closed-form certificate.
/// Probabilities at or below the critical value report +infinity.
struct TraceBounds {
  double delta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

std::vector<TraceBounds> example1_trace_bounds(const Scenario& sc, const SamplePool& pool,
                                               const std::vector<double>& delta_grid,
                                               double gamma2 = 1.0);

/// Computable scale of the necessary attacker-weight bound for the
/// shared-gate family (the free constant factor is not assigned).
double example1_necessary_ra_scale(const Scenario& sc, double delta);

}  // namespace mgare
