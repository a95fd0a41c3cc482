#include "structlqr/riccati.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace structlqr {

namespace {

constexpr int kMaxNewtonIterations = 50;

void require_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.norm());
  const double defect = (m - m.transpose()).norm();
  if (defect > 1e-12 * scale) {
    throw Error(std::string(name) + " is not symmetric",
                {{"symmetry_defect", defect}});
  }
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed");
  }
  return es.eigenvalues();
}

// r^{-1} m via Cholesky; r is validated positive definite up front.
Matrix solve_spd(const Matrix& r, const Matrix& m) {
  return r.llt().solve(m);
}

// Builds a real basis of the invariant subspace spanned by the selected
// eigenvectors. The selection must be closed under conjugation; conjugate
// pairs contribute their real and imaginary parts once (taken at the member
// with positive imaginary part), real eigenvalues contribute their
// phase-aligned eigenvector.
Matrix real_basis_from_selection(const Spectrum& s,
                                 const std::vector<int>& selection) {
  const Eigen::Index dim = s.eigenvectors.rows();
  std::vector<Vector> columns;
  columns.reserve(selection.size());
  for (int idx : selection) {
    const Complex lambda = s.eigenvalues(idx);
    const ComplexVector v = s.eigenvectors.col(idx);
    const double imag_scale = 1e-9 * std::max(1.0, std::abs(lambda));
    if (std::abs(lambda.imag()) <= imag_scale) {
      // Real eigenvalue: rotate away the arbitrary complex phase.
      Eigen::Index pivot = 0;
      v.cwiseAbs().maxCoeff(&pivot);
      const Complex phase = v(pivot) / std::abs(v(pivot));
      columns.push_back((v / phase).real());
    } else if (lambda.imag() > 0.0) {
      columns.push_back(v.real());
      columns.push_back(v.imag());
    }
    // Negative-imaginary member of the pair: handled with its conjugate.
  }
  Matrix basis(dim, static_cast<Eigen::Index>(columns.size()));
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    basis.col(j) = columns[static_cast<size_t>(j)];
  }
  return basis;
}

// Spectral projector onto the stable invariant subspace via the matrix sign
// function (Newton iteration with determinant scaling). Eigenvector bases
// degrade when eigenvalues cluster inside the stable half, which the
// Kronecker-structured problems here produce routinely; the projector only
// cares about the separation across the imaginary axis, already certified
// by the guard-band check.
Matrix stable_projector_by_sign(const Matrix& h) {
  const Eigen::Index m = h.rows();
  Matrix z = h;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::PartialPivLU<Matrix> lu(z);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    }
    const double scale = std::exp(log_det / static_cast<double>(m));
    const Matrix z_inv = lu.solve(Matrix::Identity(m, m));
    const Matrix z_next = 0.5 * (z / scale + scale * z_inv);
    const double step = (z_next - z).norm();
    z = z_next;
    if (step <= 1e-13 * std::max(1.0, z.norm())) {
      break;
    }
  }
  if ((z * z - Matrix::Identity(m, m)).norm() >
      1e-8 * static_cast<double>(m)) {
    throw Error("matrix sign iteration did not converge");
  }
  return 0.5 * (Matrix::Identity(m, m) - z);
}

// x spanning the graph of the subspace: basis = [u1; u2], x = u2 u1^{-1}.
std::optional<Matrix> graph_solution(const Matrix& basis) {
  const Eigen::Index n = basis.rows() / 2;
  if (basis.cols() != n) {
    return std::nullopt;
  }
  const Matrix u1 = basis.topRows(n);
  const Matrix u2 = basis.bottomRows(n);
  // x u1 = u2  =>  u1^T x^T = u2^T, so factor u1^T.
  Eigen::FullPivLU<Matrix> lu(u1.transpose());
  lu.setThreshold(tol::kRank);
  if (!lu.isInvertible()) {
    return std::nullopt;
  }
  Matrix x = lu.solve(u2.transpose()).transpose();
  return 0.5 * (x + x.transpose());
}

Spectrum closed_loop_spectrum(const CareProblem& p, const Matrix& x) {
  const Matrix k = solve_spd(p.r, p.b.transpose() * x);
  return eig(p.a - p.b * k);
}

RiccatiSolution finish_solution(const CareProblem& p, Matrix x,
                                int iterations) {
  RiccatiSolution sol;
  sol.x = std::move(x);
  sol.residual = care_residual(p, sol.x);
  sol.closed_loop_spectrum = closed_loop_spectrum(p, sol.x);
  sol.newton_iterations = iterations;
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sol.closed_loop_spectrum.eigenvalues.size();
       ++i) {
    max_re = std::max(max_re, sol.closed_loop_spectrum.eigenvalues(i).real());
  }
  if (sol.closed_loop_spectrum.eigenvalues.size() == 0) {
    max_re = -std::numeric_limits<double>::infinity();
  }
  sol.is_strong = max_re <= tol::kSpectrum;
  sol.is_stabilizing = max_re < -tol::kSpectrum;
  return sol;
}

}  // namespace

CareProblem::CareProblem(Matrix a_in, Matrix b_in, Matrix q_in, Matrix r_in)
    : a(std::move(a_in)),
      b(std::move(b_in)),
      q(std::move(q_in)),
      r(std::move(r_in)) {
  ensure_square(a, "Riccati drift a");
  ensure_square(q, "Riccati state weight q");
  ensure_square(r, "Riccati input weight r");
  ensure_finite(a, "Riccati drift a");
  ensure_finite(b, "Riccati input b");
  ensure_finite(q, "Riccati state weight q");
  ensure_finite(r, "Riccati input weight r");
  if (b.rows() != a.rows()) {
    throw Error("Riccati input b row count does not match the state dimension");
  }
  if (q.rows() != a.rows()) {
    throw Error("Riccati state weight dimension does not match the state");
  }
  if (r.rows() != b.cols()) {
    throw Error("Riccati input weight dimension does not match the input");
  }
  require_symmetric(q, "Riccati state weight q");
  require_symmetric(r, "Riccati input weight r");
  if (q.rows() > 0 && symmetric_eigenvalues(q).minCoeff() < -1e-10) {
    throw Error("Riccati state weight q is not positive semidefinite",
                {{"min_eigenvalue", symmetric_eigenvalues(q).minCoeff()}});
  }
  if (r.rows() == 0 || symmetric_eigenvalues(r).minCoeff() < 1e-10) {
    throw Error("Riccati input weight r is not positive definite",
                {{"min_eigenvalue",
                  r.rows() == 0 ? 0.0 : symmetric_eigenvalues(r).minCoeff()}});
  }
}

double care_residual(const CareProblem& p, const Matrix& x) {
  const Matrix gain_term = p.b * solve_spd(p.r, p.b.transpose() * x);
  return (x * gain_term - x * p.a - p.a.transpose() * x - p.q).norm();
}

Matrix hamiltonian(const CareProblem& p) {
  const Eigen::Index n = p.a.rows();
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = p.a;
  h.topRightCorner(n, n) = -p.b * solve_spd(p.r, Matrix(p.b.transpose()));
  h.bottomLeftCorner(n, n) = -p.q;
  h.bottomRightCorner(n, n) = -p.a.transpose();
  return h;
}

std::optional<Matrix> solution_from_invariant_subspace(
    const CareProblem& p, const std::vector<int>& eigenvalue_indices) {
  const Spectrum s = eig(hamiltonian(p));
  const Matrix basis = real_basis_from_selection(s, eigenvalue_indices);
  if (basis.cols() != p.a.rows()) {
    return std::nullopt;  // selection was not conjugate-closed of size n
  }
  return graph_solution(basis);
}

RiccatiSolution solve_care_stabilizing(const CareProblem& p) {
  const Eigen::Index n = p.a.rows();
  if (n == 0) {
    return finish_solution(p, Matrix(0, 0), 0);
  }
  const PbhResult stab = is_stabilizable(p.a, p.b);
  if (!stab) {
    throw Error("pair (a, b) is not stabilizable",
                {{"eigenvalue_re", stab.witness->real()},
                 {"eigenvalue_im", stab.witness->imag()}});
  }

  const Matrix h = hamiltonian(p);
  const Spectrum s = eig(h);
  size_t stable_count = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double re = s.eigenvalues(i).real();
    if (std::abs(re) < tol::kGuardBand) {
      // Eigenvalues this close to the axis make the stable subspace
      // ill-defined; with a semidefinite q this is exactly the
      // no-stabilizing-solution situation.
      throw Error(
          "Hamiltonian eigenvalue inside the imaginary-axis guard band; "
          "no stabilizing solution certified",
          {{"eigenvalue_re", re}, {"eigenvalue_im", s.eigenvalues(i).imag()}});
    }
    if (re < 0.0) {
      ++stable_count;
    }
  }
  if (stable_count != static_cast<size_t>(n)) {
    throw Error("Hamiltonian stable subspace has unexpected dimension",
                {{"dimension", static_cast<double>(stable_count)}});
  }
  // Orthonormal basis of the projector's range; rank-revealing QR puts it in
  // the leading columns.
  const Matrix projector = stable_projector_by_sign(h);
  Eigen::ColPivHouseholderQR<Matrix> qr(projector);
  qr.setThreshold(tol::kRank);
  if (qr.rank() != n) {
    throw Error("stable projector rank does not match the state dimension",
                {{"rank", static_cast<double>(qr.rank())}});
  }
  const Matrix basis =
      Matrix(qr.householderQ()).leftCols(n);
  const std::optional<Matrix> x0 = graph_solution(basis);
  if (!x0) {
    throw Error("Hamiltonian stable subspace has no graph form");
  }
  // Polish with the Kleinman iteration; from the subspace solution this
  // terminates immediately or after one Lyapunov solve.
  return newton_kleinman_refine(p, *x0);
}

RiccatiSolution newton_kleinman_refine(const CareProblem& p,
                                       const Matrix& x0) {
  ensure_square(x0, "Newton-Kleinman iterate");
  ensure_finite(x0, "Newton-Kleinman iterate");
  if (x0.rows() != p.a.rows()) {
    throw Error("Newton-Kleinman iterate dimension does not match the state");
  }
  require_symmetric(x0, "Newton-Kleinman iterate");

  // Acceptance follows the Lyapunov convention: relative to the magnitude of
  // the terms entering the equation. Weakly controllable problems can have
  // ||x|| orders of magnitude above ||q||; holding them to a q-scaled
  // absolute residual would reject machine-accurate solutions.
  const auto residual_scale = [&p](const Matrix& iterate) {
    return std::max(1.0, p.q.norm() + p.a.norm() * iterate.norm());
  };
  Matrix x = 0.5 * (x0 + x0.transpose());

  {
    const Matrix k = solve_spd(p.r, p.b.transpose() * x);
    const Spectrum cl = eig(p.a - p.b * k);
    double max_re = -std::numeric_limits<double>::infinity();
    Complex worst(0.0, 0.0);
    for (Eigen::Index i = 0; i < cl.eigenvalues.size(); ++i) {
      if (cl.eigenvalues(i).real() > max_re) {
        max_re = cl.eigenvalues(i).real();
        worst = cl.eigenvalues(i);
      }
    }
    if (p.a.rows() > 0 && max_re >= -1e-10) {
      throw Error("initial iterate is not stabilizing",
                  {{"closed_loop_eigenvalue_re", worst.real()},
                   {"closed_loop_eigenvalue_im", worst.imag()}});
    }
  }

  // Aim at the tight absolute target; near the accuracy floor the iteration
  // stops contracting and bounces, so keep the best iterate and stop there
  // instead of burning the budget.
  const double target = tol::kNewton * std::max(1.0, p.q.norm());
  int iterations = 0;
  double residual = care_residual(p, x);
  while (iterations < kMaxNewtonIterations && residual > target) {
    const Matrix k = solve_spd(p.r, p.b.transpose() * x);
    const Matrix a_cl = p.a - p.b * k;
    Matrix rhs = p.q + k.transpose() * p.r * k;
    rhs = 0.5 * (rhs + rhs.transpose());
    const Matrix refined = solve_lyapunov(a_cl, rhs);
    const double refined_residual = care_residual(p, refined);
    ++iterations;
    const bool contracting = refined_residual <= 0.5 * residual;
    if (refined_residual < residual) {
      x = refined;
      residual = refined_residual;
    }
    if (!contracting) {
      break;
    }
  }

  if (residual > tol::kResidual * residual_scale(x)) {
    throw Error("Newton-Kleinman refinement failed to converge",
                {{"residual", residual},
                 {"iterations", static_cast<double>(iterations)}});
  }
  return finish_solution(p, std::move(x), iterations);
}

Matrix symmetric_factor(const Matrix& q) {
  ensure_square(q, "factorization input");
  ensure_finite(q, "factorization input");
  require_symmetric(q, "factorization input");
  const Eigen::Index n = q.rows();
  if (n == 0) {
    return Matrix(0, 0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()));
  if (es.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed in factorization");
  }
  const Vector lambda = es.eigenvalues();
  const double lambda_max = std::max(0.0, lambda.maxCoeff());
  if (lambda.minCoeff() < -1e-10 * std::max(1.0, lambda_max)) {
    throw Error("factorization input is not positive semidefinite",
                {{"min_eigenvalue", lambda.minCoeff()}});
  }
  const double cutoff = 1e-10 * lambda_max;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) > cutoff) {
      kept.push_back(i);
    }
  }
  Matrix f(static_cast<Eigen::Index>(kept.size()), n);
  for (size_t row = 0; row < kept.size(); ++row) {
    f.row(static_cast<Eigen::Index>(row)) =
        std::sqrt(lambda(kept[row])) * es.eigenvectors().col(kept[row]).transpose();
  }
  return f;
}

Matrix g_factor(const Matrix& r) {
  ensure_square(r, "input weight");
  ensure_finite(r, "input weight");
  require_symmetric(r, "input weight");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.transpose()));
  if (es.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed in factorization");
  }
  if (es.eigenvalues().minCoeff() < 1e-10) {
    throw Error("input weight is not positive definite",
                {{"min_eigenvalue", es.eigenvalues().minCoeff()}});
  }
  // g = v diag(lambda^{-1/2}): g g^T = v lambda^{-1} v^T = r^{-1}.
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
}

GapReport gap_analysis(const Matrix& a, const Matrix& q) {
  ensure_square(a, "gap analysis drift");
  ensure_finite(a, "gap analysis drift");
  GapReport report;
  report.f_factor = symmetric_factor(q);
  if (q.rows() != a.rows()) {
    throw Error("gap analysis weight dimension does not match the state");
  }
  const Eigen::Index n = a.rows();
  const Spectrum s = eig(a);
  const double dedupe = 1e-8 * std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const Complex lambda = s.eigenvalues(i);
    if (lambda.real() <= tol::kSpectrum) {
      continue;
    }
    bool seen = false;
    for (const GapMode& mode : report.unstable_undetectable_modes) {
      if (std::abs(mode.eigenvalue - lambda) <= dedupe) {
        seen = true;
        break;
      }
    }
    if (seen) {
      continue;
    }
    // PBH stack [a - lambda I; f]; a rank drop means the mode is invisible
    // to the cost, and its right null vector is the undetectable direction.
    ComplexMatrix stacked(n + report.f_factor.rows(), n);
    stacked.topRows(n) = a.cast<Complex>();
    stacked.topRows(n).diagonal().array() -= lambda;
    stacked.bottomRows(report.f_factor.rows()) =
        report.f_factor.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? tol::kRank * sv(0) : 0.0;
    int stacked_rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > cutoff) {
        ++stacked_rank;
      }
    }
    if (stacked_rank < n) {
      GapMode mode;
      mode.eigenvalue = lambda;
      mode.eigenvector = svd.matrixV().col(n - 1);
      report.unstable_undetectable_modes.push_back(std::move(mode));
    }
  }
  report.gap_exists = !report.unstable_undetectable_modes.empty();
  return report;
}

ComparisonCertificate compare_solutions(const Matrix& x1, const Matrix& x2) {
  ensure_square(x1, "comparison input x1");
  ensure_square(x2, "comparison input x2");
  ensure_finite(x1, "comparison input x1");
  ensure_finite(x2, "comparison input x2");
  if (x1.rows() != x2.rows()) {
    throw Error("comparison inputs have different dimensions");
  }
  require_symmetric(x1, "comparison input x1");
  require_symmetric(x2, "comparison input x2");

  ComparisonCertificate cert;
  const Matrix d = 0.5 * ((x1 - x2) + (x1 - x2).transpose());
  if (d.rows() == 0) {
    cert.positive_semidefinite = true;
    cert.negative_semidefinite = true;
    cert.eigenvalues.resize(0);
    return cert;
  }
  cert.eigenvalues = symmetric_eigenvalues(d);
  const double scale =
      std::max(1.0, cert.eigenvalues.cwiseAbs().maxCoeff());
  const double margin = 1e-9 * scale;
  const double lo = cert.eigenvalues.minCoeff();
  const double hi = cert.eigenvalues.maxCoeff();
  cert.positive_definite = lo > margin;
  cert.negative_definite = hi < -margin;
  cert.positive_semidefinite = lo >= -margin;
  cert.negative_semidefinite = hi <= margin;
  cert.indefinite = lo < -margin && hi > margin;
  return cert;
}

std::string ComparisonCertificate::label() const {
  if (positive_definite) {
    return "positive_definite";
  }
  if (negative_definite) {
    return "negative_definite";
  }
  if (positive_semidefinite && negative_semidefinite) {
    return "zero";
  }
  if (positive_semidefinite) {
    return "positive_semidefinite";
  }
  if (negative_semidefinite) {
    return "negative_semidefinite";
  }
  return "indefinite";
}

}  // namespace structlqr
