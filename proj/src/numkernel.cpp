#include "structlqr/numkernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace structlqr {

namespace {

// Hurwitz rejection margin for the Lyapunov solve: eigenvalues with real
// part above this are treated as "not decaying".
constexpr double kHurwitzMargin = -1e-10;

// Unstable-side cutoff for stabilizability: modes right of this must pass
// the PBH rank test.
constexpr double kUnstableCut = -1e-9;

template <typename MatrixType>
int rank_by_svd(const MatrixType& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    return 0;
  }
  Eigen::JacobiSVD<MatrixType> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) {
    return 0;
  }
  const double cutoff = tol::kRank * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      ++r;
    }
  }
  return r;
}

// rank [a - lambda I, b] over the complex field.
int pencil_rank(const Matrix& a, const Matrix& b, Complex lambda) {
  const Eigen::Index n = a.rows();
  ComplexMatrix pencil(n, n + b.cols());
  pencil.leftCols(n) = a.cast<Complex>();
  pencil.leftCols(n).diagonal().array() -= lambda;
  pencil.rightCols(b.cols()) = b.cast<Complex>();
  return rank_by_svd<ComplexMatrix>(pencil);
}

PbhResult pbh_scan(const Matrix& a, const Matrix& b, double real_part_cut) {
  ensure_square(a, "drift matrix");
  ensure_finite(a, "drift matrix");
  ensure_finite(b, "input matrix");
  if (b.rows() != a.rows()) {
    throw Error("input matrix row count does not match the state dimension");
  }
  const Eigen::Index n = a.rows();
  PbhResult result;
  result.ok = true;
  if (n == 0) {
    return result;
  }
  const Spectrum s = eig(a);
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const Complex lambda = s.eigenvalues(i);
    if (lambda.real() < real_part_cut) {
      continue;
    }
    if (pencil_rank(a, b, lambda) < n) {
      result.ok = false;
      result.witness = lambda;
      return result;
    }
  }
  return result;
}

bool nearly_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= 1e-12 * scale;
}

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Spectrum eig(const Matrix& a) {
  ensure_square(a, "eigendecomposition input");
  ensure_finite(a, "eigendecomposition input");
  Spectrum s;
  if (a.rows() == 0) {
    s.eigenvalues.resize(0);
    s.eigenvectors.resize(0, 0);
    return s;
  }
  if (nearly_symmetric(a)) {
    // Symmetric path: real ascending eigenvalues, orthonormal eigenvectors.
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) {
      throw Error("symmetric eigendecomposition failed to converge");
    }
    s.eigenvalues = es.eigenvalues().cast<Complex>();
    s.eigenvectors = es.eigenvectors().cast<Complex>();
    return s;
  }
  Eigen::EigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw Error("eigendecomposition failed to converge");
  }
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  // Columns from Eigen are already unit norm; normalize defensively anyway
  // so downstream residual checks can rely on it.
  for (Eigen::Index j = 0; j < s.eigenvectors.cols(); ++j) {
    const double len = s.eigenvectors.col(j).norm();
    if (len > 0.0) {
      s.eigenvectors.col(j) /= len;
    }
  }
  return s;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  ensure_square(a, "Lyapunov drift");
  ensure_square(q, "Lyapunov right-hand side");
  ensure_finite(a, "Lyapunov drift");
  ensure_finite(q, "Lyapunov right-hand side");
  if (a.rows() != q.rows()) {
    throw Error("Lyapunov drift and right-hand side dimensions differ");
  }
  const double q_scale = std::max(1.0, q.norm());
  if ((q - q.transpose()).norm() > 1e-10 * q_scale) {
    throw Error("Lyapunov right-hand side is not symmetric",
                {{"symmetry_defect", (q - q.transpose()).norm()}});
  }
  const Eigen::Index n = a.rows();
  if (n == 0) {
    return Matrix(0, 0);
  }
  const Matrix qs = 0.5 * (q + q.transpose());

  // Work with m = a^T so the equation reads m x + x m^* + q = 0, the shape
  // the triangular back-substitution below expects.
  Eigen::ComplexSchur<Matrix> schur(a.transpose());
  if (schur.info() != Eigen::Success) {
    throw Error("Schur decomposition failed in Lyapunov solve");
  }
  const ComplexMatrix t = schur.matrixT();
  const ComplexMatrix u = schur.matrixU();

  double max_re = -std::numeric_limits<double>::infinity();
  Complex worst(0.0, 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (t(k, k).real() > max_re) {
      max_re = t(k, k).real();
      worst = t(k, k);
    }
  }
  if (max_re >= kHurwitzMargin) {
    throw Error("Lyapunov drift is not Hurwitz",
                {{"eigenvalue_re", worst.real()},
                 {"eigenvalue_im", worst.imag()}});
  }

  // Transformed equation t y + y t^* + f = 0 with f = u^* q u; t upper
  // triangular, so columns resolve from the last one backwards:
  //   (t + conj(t_kk) I) y_k = -(f_k + sum_{j>k} conj(t_kj) y_j).
  const ComplexMatrix f = u.adjoint() * qs.cast<Complex>() * u;
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    ComplexVector rhs = f.col(k);
    for (Eigen::Index j = k + 1; j < n; ++j) {
      rhs += std::conj(t(k, j)) * y.col(j);
    }
    ComplexMatrix shifted = t;
    shifted.diagonal().array() += std::conj(t(k, k));
    y.col(k) = shifted.triangularView<Eigen::Upper>().solve(-rhs);
  }

  Matrix x = (u * y * u.adjoint()).real();
  x = 0.5 * (x + x.transpose());

  const double residual = (a.transpose() * x + x * a + qs).norm();
  const double bound = tol::kResidual * (a.norm() * x.norm() + qs.norm());
  if (residual > std::max(bound, 1e-300)) {
    throw Error("Lyapunov solve residual check failed",
                {{"residual", residual}, {"bound", bound}});
  }
  return x;
}

PbhResult is_controllable(const Matrix& a, const Matrix& b) {
  return pbh_scan(a, b, -std::numeric_limits<double>::infinity());
}

PbhResult is_stabilizable(const Matrix& a, const Matrix& b) {
  return pbh_scan(a, b, kUnstableCut);
}

bool is_detectable_mode(const Matrix& a, const Matrix& f, Complex lambda) {
  ensure_square(a, "drift matrix");
  ensure_finite(a, "drift matrix");
  ensure_finite(f, "output factor");
  if (f.cols() != a.cols()) {
    throw Error("output factor column count does not match the state dimension");
  }
  const Eigen::Index n = a.rows();
  const Spectrum s = eig(a);
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    closest = std::min(closest, std::abs(s.eigenvalues(i) - lambda));
  }
  if (closest > 1e-6 * std::max(1.0, a.norm())) {
    throw Error("query value is not an eigenvalue of the drift",
                {{"distance_to_spectrum", closest},
                 {"lambda_re", lambda.real()},
                 {"lambda_im", lambda.imag()}});
  }
  ComplexMatrix stacked(n + f.rows(), n);
  stacked.topRows(n) = a.cast<Complex>();
  stacked.topRows(n).diagonal().array() -= lambda;
  stacked.bottomRows(f.rows()) = f.cast<Complex>();
  return rank_by_svd<ComplexMatrix>(stacked) == n;
}

bool orthonormal_rows_check(const Matrix& c) {
  ensure_finite(c, "output map");
  if (c.rows() == 0) {
    return true;
  }
  const Matrix defect =
      c * c.transpose() - Matrix::Identity(c.rows(), c.rows());
  return defect.norm() <= tol::kOrthonormal;
}

int rank(const Matrix& m) { return rank_by_svd<Matrix>(m); }

int rank(const ComplexMatrix& m) { return rank_by_svd<ComplexMatrix>(m); }

}  // namespace structlqr
