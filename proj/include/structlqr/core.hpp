#pragma once

#include <Eigen/Core>

#include <complex>
#include <map>
#include <stdexcept>
#include <string>

namespace structlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Every solver failure throws one of these. The witness map carries named
/// scalars a caller (or the CLI's error JSON) can act on, e.g. the real and
/// imaginary part of a failing PBH eigenvalue or the norm of a violated
/// structural constraint.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what,
                 std::map<std::string, double> witness = {})
      : std::runtime_error(what), witness_(std::move(witness)) {}

  const std::map<std::string, double>& witness() const noexcept {
    return witness_;
  }

 private:
  std::map<std::string, double> witness_;
};

// Shared numeric policy. These are deliberately plain constants, not knobs:
// the certificates below are contracts, and moving them is an API change.
namespace tol {
// Singular values below kRank * sigma_max count as zero in rank decisions.
inline constexpr double kRank = 1e-8;
// Row-orthonormality defect allowed in output maps, ||c c^T - I||_F.
inline constexpr double kOrthonormal = 1e-10;
// Hamiltonian eigenvalues closer than this to the imaginary axis abort the
// stabilizing solve instead of silently picking a subspace.
inline constexpr double kGuardBand = 1e-8;
// Closed-loop eigenvalue classification margin (strong vs. stabilizing).
inline constexpr double kSpectrum = 1e-8;
// Relative residual scale for Lyapunov and Riccati solves.
inline constexpr double kResidual = 1e-9;
// Newton-Kleinman target: residual <= kNewton * max(1, ||q||); the loop
// also stops once the residual no longer contracts (accuracy floor).
inline constexpr double kNewton = 1e-11;
// Exact structural identities (gain lift, broadcast block equality).
inline constexpr double kExact = 1e-12;
// Diffusive-structure certificate bound, ||K (1 (x) I)||.
inline constexpr double kDiffusive = 1e-10;
}  // namespace tol

/// Rejects NaN/Inf at construction boundaries so they cannot propagate
/// silently through the solvers.
inline void ensure_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw Error("non-finite entries in " + what);
  }
}

inline void ensure_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw Error(what + " must be square, got " + std::to_string(m.rows()) +
                "x" + std::to_string(m.cols()));
  }
}

}  // namespace structlqr
