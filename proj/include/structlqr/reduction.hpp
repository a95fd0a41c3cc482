#pragma once

#include <map>
#include <string>

#include "structlqr/riccati.hpp"

namespace structlqr {

/// A fictitious output y = c x with orthonormal rows. Construction rejects
/// maps whose rows are not orthonormal (defect above 1e-10), so every
/// OutputMap in flight satisfies c c^T = I.
class OutputMap {
 public:
  explicit OutputMap(Matrix c);

  const Matrix& matrix() const noexcept { return c_; }
  Eigen::Index output_dim() const noexcept { return c_.rows(); }
  Eigen::Index state_dim() const noexcept { return c_.cols(); }

  /// Orthogonal projector c^T c onto the row space of c.
  Matrix projector() const { return c_.transpose() * c_; }

 private:
  Matrix c_;
};

enum class StructureTag { generic, diffusive, broadcast };

std::string to_string(StructureTag tag);

/// The output-coordinate problem induced by an invariant-kernel output map:
/// drift a_reduced = c a c^T, input b_reduced = c b, weights on the output
/// and input spaces. Construction re-checks the intertwining identity
/// c a = a_reduced c against the full drift.
struct ReducedProblem {
  Matrix a_reduced;
  Matrix b_reduced;
  Matrix q_reduced;
  Matrix r;
  OutputMap output;

  ReducedProblem(Matrix a_reduced_in, Matrix b_reduced_in, Matrix q_reduced_in,
                 Matrix r_in, OutputMap output_in, const Matrix& a_full);
};

/// Synthesis product. k_full acts on the full state, k_reduced on the output
/// y = c x, and k_full = k_reduced * c holds by construction (the lift).
/// p_value is the value matrix of the reduced problem: the optimal cost from
/// x0 is (c x0)^T p_value (c x0). certificates maps residual names to their
/// achieved values; note carries informational text for degenerate cases.
struct GainResult {
  Matrix k_full;
  Matrix k_reduced;
  Matrix p_value;
  StructureTag structure_tag = StructureTag::generic;
  std::map<std::string, double> certificates;
  std::string note;
};

/// Compresses the drift onto the output coordinates: returns c a c^T after
/// verifying that ker c is invariant under a, i.e.
/// ||c a (I - c^T c)||_F <= 1e-9 ||a||_F. Violations throw with the defect
/// norm as witness.
Matrix induced_output_map(const Matrix& a, const OutputMap& c);

/// The output-reduction synthesis route: compress (a, b) through c, demand
/// the reduced pair controllable (PBH witness on failure), solve the reduced
/// Riccati equation, and lift the optimal static output feedback back to the
/// full state. q_reduced and r must be positive definite.
GainResult solve_output_lqr(const Matrix& a, const Matrix& b,
                            const OutputMap& c, const Matrix& q_reduced,
                            const Matrix& r);

}  // namespace structlqr
