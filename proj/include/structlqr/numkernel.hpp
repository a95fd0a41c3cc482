#pragma once

#include <optional>

#include "structlqr/core.hpp"

namespace structlqr {

/// Eigendecomposition result. Eigenvectors are unit-norm columns, one per
/// eigenvalue, in matching order. Real symmetric inputs produce real
/// eigenvalues (zero imaginary part) sorted ascending.
struct Spectrum {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;
};

/// Outcome of a PBH rank test. When the pair fails, witness holds an
/// eigenvalue at which the rank drops.
struct PbhResult {
  bool ok = false;
  std::optional<Complex> witness;

  explicit operator bool() const noexcept { return ok; }
};

/// Kronecker product, (a (x) b)[i*p+k, j*q+l] = a(i,j) * b(k,l).
Matrix kron(const Matrix& a, const Matrix& b);

/// Dense eigendecomposition. Symmetric inputs take a symmetric-specialized
/// path and come back with real, ascending eigenvalues.
Spectrum eig(const Matrix& a);

/// Solves a^T x + x a + q = 0 for symmetric q and Hurwitz a via complex Schur
/// reduction and back-substitution. Throws if a has an eigenvalue with real
/// part >= -1e-10, or if the residual check fails afterwards.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// PBH controllability: rank [a - lambda I, b] = n at every eigenvalue.
PbhResult is_controllable(const Matrix& a, const Matrix& b);

/// PBH stabilizability: the rank condition at eigenvalues with
/// Re(lambda) >= -1e-9 only.
PbhResult is_stabilizable(const Matrix& a, const Matrix& b);

/// PBH detectability of a single mode: rank [a - lambda I; f] = n. The
/// query lambda must be an eigenvalue of a (within 1e-6 * max(1, ||a||)).
bool is_detectable_mode(const Matrix& a, const Matrix& f, Complex lambda);

/// True when ||c c^T - I||_F <= 1e-10, i.e. the rows of c are orthonormal.
bool orthonormal_rows_check(const Matrix& c);

/// Numerical rank with the shared cutoff sigma < 1e-8 * sigma_max.
int rank(const Matrix& m);
int rank(const ComplexMatrix& m);

}  // namespace structlqr
