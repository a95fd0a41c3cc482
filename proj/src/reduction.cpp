#include "structlqr/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace structlqr {

namespace {

void require_positive_definite(const Matrix& m, const char* name) {
  ensure_square(m, name);
  ensure_finite(m, name);
  const double scale = std::max(1.0, m.norm());
  const double defect = (m - m.transpose()).norm();
  if (defect > 1e-12 * scale) {
    throw Error(std::string(name) + " is not symmetric",
                {{"symmetry_defect", defect}});
  }
  if (m.rows() == 0) {
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= 1e-10) {
    throw Error(std::string(name) + " is not positive definite",
                {{"min_eigenvalue", es.eigenvalues().minCoeff()}});
  }
}

}  // namespace

OutputMap::OutputMap(Matrix c) : c_(std::move(c)) {
  ensure_finite(c_, "output map");
  if (c_.rows() > c_.cols()) {
    throw Error("output map has more rows than state dimensions");
  }
  if (!orthonormal_rows_check(c_)) {
    const Matrix defect =
        c_ * c_.transpose() - Matrix::Identity(c_.rows(), c_.rows());
    throw Error("output map rows are not orthonormal",
                {{"orthonormality_defect", defect.norm()}});
  }
}

std::string to_string(StructureTag tag) {
  switch (tag) {
    case StructureTag::diffusive:
      return "diffusive";
    case StructureTag::broadcast:
      return "broadcast";
    case StructureTag::generic:
      break;
  }
  return "generic";
}

Matrix induced_output_map(const Matrix& a, const OutputMap& c) {
  ensure_square(a, "drift matrix");
  ensure_finite(a, "drift matrix");
  if (c.state_dim() != a.rows()) {
    throw Error("output map state dimension does not match the drift");
  }
  const Matrix& cm = c.matrix();
  const Matrix complement =
      Matrix::Identity(a.rows(), a.rows()) - c.projector();
  const double violation = (cm * a * complement).norm();
  const double bound = tol::kResidual * a.norm();
  if (violation > bound) {
    throw Error("output map kernel is not invariant under the drift",
                {{"violation_norm", violation}, {"bound", bound}});
  }
  return cm * a * cm.transpose();
}

ReducedProblem::ReducedProblem(Matrix a_reduced_in, Matrix b_reduced_in,
                               Matrix q_reduced_in, Matrix r_in,
                               OutputMap output_in, const Matrix& a_full)
    : a_reduced(std::move(a_reduced_in)),
      b_reduced(std::move(b_reduced_in)),
      q_reduced(std::move(q_reduced_in)),
      r(std::move(r_in)),
      output(std::move(output_in)) {
  const Matrix& cm = output.matrix();
  if (a_reduced.rows() != cm.rows() || b_reduced.rows() != cm.rows()) {
    throw Error("reduced system dimensions do not match the output map");
  }
  // The defining identity of the reduction: the output map intertwines the
  // full and reduced drifts.
  const double defect = (cm * a_full - a_reduced * cm).norm();
  const double bound = tol::kResidual * std::max(1.0, a_full.norm());
  if (defect > bound) {
    throw Error("reduced drift does not intertwine with the full drift",
                {{"intertwining_defect", defect}, {"bound", bound}});
  }
  require_positive_definite(q_reduced, "reduced state weight");
  require_positive_definite(r, "input weight");
}

GainResult solve_output_lqr(const Matrix& a, const Matrix& b,
                            const OutputMap& c, const Matrix& q_reduced,
                            const Matrix& r) {
  ensure_finite(b, "input matrix");
  if (b.rows() != a.rows()) {
    throw Error("input matrix row count does not match the state dimension");
  }
  require_positive_definite(q_reduced, "reduced state weight");
  require_positive_definite(r, "input weight");
  if (q_reduced.rows() != c.output_dim()) {
    throw Error("reduced state weight dimension does not match the output");
  }

  const Matrix a_reduced = induced_output_map(a, c);
  const Matrix b_reduced = c.matrix() * b;
  if (r.rows() != b_reduced.cols()) {
    throw Error("input weight dimension does not match the input");
  }

  const PbhResult ctrl = is_controllable(a_reduced, b_reduced);
  if (!ctrl) {
    throw Error("reduced pair is not controllable",
                {{"eigenvalue_re", ctrl.witness->real()},
                 {"eigenvalue_im", ctrl.witness->imag()}});
  }

  const CareProblem care(a_reduced, b_reduced, q_reduced, r);
  const RiccatiSolution sol = solve_care_stabilizing(care);

  GainResult result;
  result.p_value = sol.x;
  result.k_reduced = -r.llt().solve(b_reduced.transpose() * sol.x);
  result.k_full = result.k_reduced * c.matrix();
  result.structure_tag = StructureTag::generic;
  result.certificates["are_residual"] = sol.residual;
  result.certificates["invariance_violation"] =
      (c.matrix() * a *
       (Matrix::Identity(a.rows(), a.rows()) - c.projector()))
          .norm();
  // The lift annihilates ker c by construction; record the achieved norm.
  result.certificates["lift_kernel_norm"] =
      (result.k_full *
       (Matrix::Identity(a.rows(), a.rows()) - c.projector()))
          .norm();
  return result;
}

}  // namespace structlqr
