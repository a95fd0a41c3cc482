#pragma once

#include <iosfwd>
#include <vector>

#include "structlqr/reduction.hpp"

namespace structlqr {

/// Sampled closed-loop run. simulate_closed_loop fills times and states;
/// evaluate_cost fills inputs and running_cost; attach_output fills
/// sync_error. Populated lists always share the length of times.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> sync_error;
  std::vector<double> running_cost;
};

/// Scalar surface (values) or planar vector field (vectors) sampled on a
/// uniform square grid over [-extent, extent]^2; exactly one of the two
/// payloads is populated.
struct GridField {
  std::vector<Eigen::Vector2d> grid_points;
  std::vector<double> values;
  std::vector<Eigen::Vector2d> vectors;
};

/// Fixed-step fourth-order Runge-Kutta integration of dx = a_cl x from x0
/// over [0, horizon] with step dt (horizon >= dt > 0). A non-finite state
/// aborts with the first bad time as witness.
Trajectory simulate_closed_loop(const Matrix& a_cl, const Vector& x0,
                                double horizon, double dt);

/// Accumulates the quadratic cost x^T Qw x + u^T r u with u = k x along the
/// trajectory by trapezoidal quadrature. Fills traj.inputs and
/// traj.running_cost (cumulative, starting at 0) and returns the total.
double evaluate_cost(Trajectory& traj, const Matrix& state_weight,
                     const Matrix& k, const Matrix& r);

/// Attaches e = map * x per sample (disagreement projection for sync runs,
/// centroid extraction for centroid runs).
void attach_output(Trajectory& traj, const Matrix& map);

/// Pulls the reduced value matrix back to the full state space,
/// x^T (c^T p_value c) x = y^T p_value y.
Matrix value_matrix(const GainResult& gain, const OutputMap& c);

/// Samples the quadratic form x0^T x_mat x0 of a 2 x 2 matrix on the grid.
GridField surface_grid(const Matrix& x_mat, double extent = 2.0,
                       int resolution = 41);

/// Samples the effective drift field c^T c a x of a planar system: the part
/// of the velocity the output coordinates see. Constant along translates of
/// ker c.
GridField effective_field_grid(const Matrix& a, const OutputMap& c,
                               double extent = 2.0, int resolution = 41);

/// CSV emitters, 9 significant digits. Trajectory columns:
/// t, x_1..x_n, u_1..u_p, e_norm, J_running. Grid columns: x1, x2, v for
/// surfaces and x1, x2, f1, f2 for fields.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_grid_csv(const GridField& grid, std::ostream& out);

}  // namespace structlqr
