#include "structlqr/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace structlqr {

namespace {

// 9 significant digits everywhere a number leaves the toolkit. Negative
// zero is folded into plain zero so equal runs stay byte-identical even
// across sign-of-zero differences.
void append_number(std::string& line, double v) {
  if (v == 0.0) {
    v = 0.0;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  line += buf;
}

}  // namespace

Trajectory simulate_closed_loop(const Matrix& a_cl, const Vector& x0,
                                double horizon, double dt) {
  ensure_square(a_cl, "closed-loop matrix");
  ensure_finite(a_cl, "closed-loop matrix");
  if (x0.size() != a_cl.rows()) {
    throw Error("initial state dimension does not match the closed loop");
  }
  if (!x0.allFinite()) {
    throw Error("non-finite entries in initial state");
  }
  if (!(dt > 0.0) || !(horizon >= dt)) {
    throw Error("need horizon >= dt > 0",
                {{"horizon", horizon}, {"dt", dt}});
  }

  const long long steps = std::llround(horizon / dt);
  Trajectory traj;
  traj.times.reserve(static_cast<size_t>(steps) + 1);
  traj.states.reserve(static_cast<size_t>(steps) + 1);
  Vector x = x0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  for (long long k = 0; k < steps; ++k) {
    const Vector k1 = a_cl * x;
    const Vector k2 = a_cl * (x + 0.5 * dt * k1);
    const Vector k3 = a_cl * (x + 0.5 * dt * k2);
    const Vector k4 = a_cl * (x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(k + 1) * dt;
    if (!x.allFinite()) {
      throw Error("trajectory left the finite range", {{"first_bad_time", t}});
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

double evaluate_cost(Trajectory& traj, const Matrix& state_weight,
                     const Matrix& k, const Matrix& r) {
  if (traj.states.empty() || traj.states.size() != traj.times.size()) {
    throw Error("trajectory has no states to integrate");
  }
  const Eigen::Index n = traj.states.front().size();
  ensure_square(state_weight, "running-cost state weight");
  ensure_square(r, "running-cost input weight");
  ensure_finite(state_weight, "running-cost state weight");
  ensure_finite(k, "feedback gain");
  ensure_finite(r, "running-cost input weight");
  if (state_weight.rows() != n || k.cols() != n || r.rows() != k.rows()) {
    throw Error("running-cost dimensions do not match the trajectory");
  }

  traj.inputs.clear();
  traj.running_cost.clear();
  traj.inputs.reserve(traj.states.size());
  traj.running_cost.reserve(traj.states.size());

  double total = 0.0;
  double prev_integrand = 0.0;
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const Vector& x = traj.states[i];
    const Vector u = k * x;
    const double integrand =
        x.dot(state_weight * x) + u.dot(r * u);
    if (!std::isfinite(integrand)) {
      throw Error("running cost left the finite range",
                  {{"first_bad_time", traj.times[i]}});
    }
    if (i > 0) {
      total += 0.5 * (traj.times[i] - traj.times[i - 1]) *
               (integrand + prev_integrand);
    }
    traj.inputs.push_back(u);
    traj.running_cost.push_back(total);
    prev_integrand = integrand;
  }
  return total;
}

void attach_output(Trajectory& traj, const Matrix& map) {
  ensure_finite(map, "output map");
  if (!traj.states.empty() && map.cols() != traj.states.front().size()) {
    throw Error("output map does not match the trajectory state dimension");
  }
  traj.sync_error.clear();
  traj.sync_error.reserve(traj.states.size());
  for (const Vector& x : traj.states) {
    traj.sync_error.push_back(map * x);
  }
}

Matrix value_matrix(const GainResult& gain, const OutputMap& c) {
  if (gain.p_value.rows() != c.output_dim()) {
    throw Error("value matrix dimension does not match the output map");
  }
  if (gain.k_full.cols() != c.state_dim()) {
    throw Error("gain state dimension does not match the output map");
  }
  return c.matrix().transpose() * gain.p_value * c.matrix();
}

GridField surface_grid(const Matrix& x_mat, double extent, int resolution) {
  ensure_square(x_mat, "surface matrix");
  ensure_finite(x_mat, "surface matrix");
  if (x_mat.rows() != 2) {
    throw Error("surface sampling needs a 2 x 2 matrix",
                {{"dimension", static_cast<double>(x_mat.rows())}});
  }
  if (resolution < 2 || !(extent > 0.0)) {
    throw Error("need resolution >= 2 and extent > 0");
  }
  GridField grid;
  grid.grid_points.reserve(static_cast<size_t>(resolution) * resolution);
  grid.values.reserve(static_cast<size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double x1 = -extent + 2.0 * extent * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double x2 = -extent + 2.0 * extent * j / (resolution - 1);
      const Eigen::Vector2d point(x1, x2);
      grid.grid_points.push_back(point);
      grid.values.push_back(point.dot(x_mat * point));
    }
  }
  return grid;
}

GridField effective_field_grid(const Matrix& a, const OutputMap& c,
                               double extent, int resolution) {
  ensure_square(a, "field drift");
  ensure_finite(a, "field drift");
  if (a.rows() != 2 || c.state_dim() != 2) {
    throw Error("field sampling needs a planar system");
  }
  if (resolution < 2 || !(extent > 0.0)) {
    throw Error("need resolution >= 2 and extent > 0");
  }
  // The component of the velocity visible to the output coordinates; it is
  // constant along translates of ker c, which is what the sampling shows.
  const Matrix effective = c.projector() * a;
  GridField grid;
  grid.grid_points.reserve(static_cast<size_t>(resolution) * resolution);
  grid.vectors.reserve(static_cast<size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double x1 = -extent + 2.0 * extent * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double x2 = -extent + 2.0 * extent * j / (resolution - 1);
      const Eigen::Vector2d point(x1, x2);
      grid.grid_points.push_back(point);
      grid.vectors.push_back(effective * point);
    }
  }
  return grid;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const size_t count = traj.times.size();
  if (traj.states.size() != count || traj.inputs.size() != count ||
      traj.sync_error.size() != count || traj.running_cost.size() != count) {
    throw Error("trajectory lists must be fully populated before writing");
  }
  const Eigen::Index n = count > 0 ? traj.states.front().size() : 0;
  const Eigen::Index p = count > 0 ? traj.inputs.front().size() : 0;

  std::string line = "t";
  for (Eigen::Index i = 1; i <= n; ++i) {
    line += ",x_" + std::to_string(i);
  }
  for (Eigen::Index i = 1; i <= p; ++i) {
    line += ",u_" + std::to_string(i);
  }
  line += ",e_norm,J_running\n";
  out << line;

  for (size_t row = 0; row < count; ++row) {
    line.clear();
    append_number(line, traj.times[row]);
    for (Eigen::Index i = 0; i < n; ++i) {
      line += ',';
      append_number(line, traj.states[row](i));
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      line += ',';
      append_number(line, traj.inputs[row](i));
    }
    line += ',';
    append_number(line, traj.sync_error[row].norm());
    line += ',';
    append_number(line, traj.running_cost[row]);
    line += '\n';
    out << line;
  }
}

void write_grid_csv(const GridField& grid, std::ostream& out) {
  const bool surface = !grid.values.empty();
  const bool field = !grid.vectors.empty();
  if (surface == field) {
    throw Error("grid must carry exactly one of values or vectors");
  }
  if ((surface ? grid.values.size() : grid.vectors.size()) !=
      grid.grid_points.size()) {
    throw Error("grid payload length does not match the points");
  }
  out << (surface ? "x1,x2,v\n" : "x1,x2,f1,f2\n");
  std::string line;
  for (size_t i = 0; i < grid.grid_points.size(); ++i) {
    line.clear();
    append_number(line, grid.grid_points[i](0));
    line += ',';
    append_number(line, grid.grid_points[i](1));
    if (surface) {
      line += ',';
      append_number(line, grid.values[i]);
    } else {
      line += ',';
      append_number(line, grid.vectors[i](0));
      line += ',';
      append_number(line, grid.vectors[i](1));
    }
    line += '\n';
    out << line;
  }
}

}  // namespace structlqr
