#pragma once

#include "structlqr/reduction.hpp"

namespace structlqr {

enum class ProblemKind { sync, centroid };
enum class WeightMode { homogeneous, full };

std::string to_string(ProblemKind kind);

/// Cost weights for a multi-agent problem. In homogeneous mode state_weight
/// and input_weight are per-agent blocks (n x n and p x p); in full mode they
/// weight whole vectors: for sync either the disagreement coordinates
/// ((N-1)n) or the stacked state (Nn, compressed internally), for centroid
/// the centroid coordinates (n), and the input weight is always Np x Np.
struct Weights {
  WeightMode mode = WeightMode::homogeneous;
  Matrix state_weight;
  Matrix input_weight;
};

/// N identical agents dx_i = A x_i + B u_i with a shared quadratic cost.
/// Construction validates shapes, finiteness, symmetry/definiteness of the
/// weights, and PBH controllability of (A, B).
struct MultiAgentProblem {
  ProblemKind kind = ProblemKind::sync;
  int n_agents = 0;
  Matrix a;
  Matrix b;
  Weights weights;

  MultiAgentProblem(ProblemKind kind_in, int n_agents_in, Matrix a_in,
                    Matrix b_in, Weights weights_in);

  Eigen::Index state_dim() const noexcept { return a.rows(); }
  Eigen::Index input_dim() const noexcept { return b.cols(); }
};

/// Orthonormal basis of the disagreement subspace {x : sum x_i = 0} in R^N,
/// plus the orthogonal projector onto it. Column k of basis is
/// (-1, ..., -1, k, 0, ..., 0) / sqrt(k (k+1)) with k leading -1 entries;
/// the projector equals I - (1/N) * ones, i.e. 1/N times the complete-graph
/// Laplacian.
struct SubspaceBasis {
  Matrix basis;       // N x (N-1), orthonormal columns, each orthogonal to 1
  Matrix projection;  // basis * basis^T
};

SubspaceBasis disagreement_basis(int n_agents);

/// Assembles the synchronization problem in disagreement coordinates:
/// output map (basis^T (x) I_n), drift I_{N-1} (x) A, input basis^T (x) B.
/// A full-space state weight (Nn x Nn) is compressed through the output map.
ReducedProblem build_sync_problem(const MultiAgentProblem& p);

/// Same, over a caller-supplied orthonormal basis of the disagreement
/// subspace (used to confirm the result does not depend on the basis).
ReducedProblem build_sync_problem_with_basis(const MultiAgentProblem& p,
                                             const Matrix& basis);

/// Optimal synchronizing gain via the reduction route. The result is
/// diffusive: k_full annihilates the agreement direction,
/// ||k_full (1 (x) I_n)|| <= 1e-10 (certificate "diffusive_norm").
/// N = 1 returns a zero gain with an informational note.
GainResult solve_sync(const MultiAgentProblem& p);
GainResult solve_sync_with_basis(const MultiAgentProblem& p,
                                 const Matrix& basis);

/// Fast path for homogeneous weights: one n-dimensional Riccati solve for
/// the per-agent block y, then
///   k_full = -(1/N) L (x) W^{-1} B^T y
/// with L the complete-graph Laplacian, equivalently the pairwise law
/// u_i = (1/N) sum_j W^{-1} B^T y (x_j - x_i). Produces the same gain as
/// solve_sync on the expanded weights.
GainResult solve_sync_homogeneous(const MultiAgentProblem& p);

/// Assembles the centroid-stabilization problem: output map
/// (1/sqrt(N)) (I_n ... I_n), reduced drift A, reduced input
/// (1/sqrt(N)) (B ... B). The n x n state weight is scaled by N so the
/// optimized cost is exactly the integral of (sum x_i)^T Q (sum x_i) + u^T R u.
ReducedProblem build_centroid_problem(const MultiAgentProblem& p);

/// Optimal centroid-stabilizing gain. With a homogeneous input weight
/// (R = I_N (x) W, detected also inside full-mode input weights) the gain is
/// a broadcast: all N agent blocks identical (certificate
/// "broadcast_mismatch" <= 1e-12), each agent applying
/// u_i = -W^{-1} B^T P (sum_j x_j) where P = p_value / N solves the
/// n-dimensional equation P A + A^T P - N P B W^{-1} B^T P + Q = 0.
/// Heterogeneous input weights fall back to the generic reduction route;
/// the gain still factors through sum x_i (certificate
/// "aggregate_rank_one") but the blocks differ.
GainResult solve_centroid(const MultiAgentProblem& p);

/// Stacked full-system matrices I_N (x) A and I_N (x) B.
Matrix stacked_drift(const MultiAgentProblem& p);
Matrix stacked_input(const MultiAgentProblem& p);

/// The state weight induced on the stacked space, c^T q_reduced c. Feeds the
/// gap analysis and cost evaluation.
Matrix stacked_state_weight(const ReducedProblem& rp);

}  // namespace structlqr
