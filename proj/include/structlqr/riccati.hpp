#pragma once

#include <optional>
#include <vector>

#include "structlqr/numkernel.hpp"

namespace structlqr {

/// Data of the algebraic Riccati equation
///
///   x b r^{-1} b^T x - x a - a^T x - q = 0.
///
/// The constructor validates shapes, symmetry of q and r (defect below
/// 1e-12 relative), q >= 0 and r > 0 (eigenvalue floors -1e-10 and 1e-10).
struct CareProblem {
  Matrix a;
  Matrix b;
  Matrix q;
  Matrix r;

  CareProblem(Matrix a_in, Matrix b_in, Matrix q_in, Matrix r_in);
};

struct RiccatiSolution {
  Matrix x;                       // symmetric solution
  double residual = 0.0;          // Frobenius norm of the equation residual
  Spectrum closed_loop_spectrum;  // eig(a - b r^{-1} b^T x)
  bool is_strong = false;         // closed-loop spectrum in closed left half-plane
  bool is_stabilizing = false;    // closed-loop spectrum in open left half-plane
  int newton_iterations = 0;      // Lyapunov solves spent in refinement
};

/// One undetectable unstable mode: a(v) = lambda v with Re(lambda) > 0 and
/// f v = 0 for the symmetric factor f of the state weight.
struct GapMode {
  Complex eigenvalue;
  ComplexVector eigenvector;
};

/// Verdict of the optimality-gap test: the smallest positive semidefinite
/// solution separates from the strong one exactly when some open-right-half-
/// plane eigenvector of the drift is invisible to the cost.
struct GapReport {
  bool gap_exists = false;
  std::vector<GapMode> unstable_undetectable_modes;
  Matrix f_factor;  // f with f^T f = q, full row rank
};

/// Definiteness certificate for the difference x1 - x2. The zero matrix is
/// both positive and negative semidefinite; label() collapses the flags to
/// one of "positive_definite", "positive_semidefinite", "zero",
/// "negative_semidefinite", "negative_definite", "indefinite".
struct ComparisonCertificate {
  bool positive_definite = false;
  bool positive_semidefinite = false;
  bool negative_definite = false;
  bool negative_semidefinite = false;
  bool indefinite = false;
  Vector eigenvalues;  // of x1 - x2, ascending

  std::string label() const;
};

/// Stabilizing solution via the stable invariant subspace of the 2n x 2n
/// Hamiltonian (matrix-sign spectral projector, robust to eigenvalue
/// clustering inside the stable half), polished by Newton-Kleinman. Errors:
/// (a, b) not stabilizable (with PBH witness), or a Hamiltonian eigenvalue
/// inside the 1e-8 guard band around the imaginary axis (no stabilizing
/// solution certified).
RiccatiSolution solve_care_stabilizing(const CareProblem& p);

/// Kleinman iteration from a stabilizing symmetric iterate x0: repeatedly
/// solve the closed-loop Lyapunov equation until the Riccati residual drops
/// below 1e-11 * max(1, ||q||), stops contracting (the accuracy floor for
/// stiff problems with ||x|| >> ||q||), or 50 iterations pass. The result
/// must satisfy residual <= 1e-9 * max(1, ||q|| + ||a|| ||x||). Quadratic
/// convergence; an exact x0 returns unchanged.
RiccatiSolution newton_kleinman_refine(const CareProblem& p, const Matrix& x0);

/// Detects the smallest-vs-strong solution gap for the pair (a, q): factor
/// q = f^T f, then PBH-test every open-right-half-plane eigenvalue of a
/// against f. No gap is possible for positive definite q.
GapReport gap_analysis(const Matrix& a, const Matrix& q);

/// Definiteness of x1 - x2 with eigenvalue certificate.
ComparisonCertificate compare_solutions(const Matrix& x1, const Matrix& x2);

/// Frobenius norm of the Riccati residual at x.
double care_residual(const CareProblem& p, const Matrix& x);

/// Full-row-rank f with f^T f = q for symmetric positive semidefinite q.
/// Eigenvalues below 1e-10 * lambda_max are treated as exact zeros.
Matrix symmetric_factor(const Matrix& q);

/// g with g g^T = r^{-1} for symmetric positive definite r; feeds the
/// stabilizability precondition (a, b g) of the maximality theorem.
Matrix g_factor(const Matrix& r);

/// The 2n x 2n matrix [[a, -b r^{-1} b^T], [-q, -a^T]] whose invariant
/// subspaces index the symmetric Riccati solutions.
Matrix hamiltonian(const CareProblem& p);

/// Assembles the symmetric solution attached to the invariant subspace
/// spanned by the selected eigenvectors of hamiltonian(p). The selection
/// must be closed under conjugation and have size n; returns nullopt when
/// the subspace has no graph form (singular upper block). Exposed so tests
/// and explorations can enumerate non-stable solutions.
std::optional<Matrix> solution_from_invariant_subspace(
    const CareProblem& p, const std::vector<int>& eigenvalue_indices);

}  // namespace structlqr
