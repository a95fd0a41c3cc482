// Acceptance gate for the synthesis toolkit. Each criterion prints exactly
// one [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.
// Tolerances are pinned here on purpose; do not loosen them to make a run
// green.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "structlqr/multiagent.hpp"
#include "structlqr/riccati.hpp"
#include "structlqr/simulate.hpp"

using structlqr::CareProblem;
using structlqr::Matrix;
using structlqr::MultiAgentProblem;
using structlqr::OutputMap;
using structlqr::ProblemKind;
using structlqr::Vector;
using structlqr::WeightMode;
using structlqr::Weights;

namespace {

const double kRoot2 = std::sqrt(2.0);
const double kRoot3 = std::sqrt(3.0);

// Failure accumulator: keeps the first broken requirement of a criterion.
class Criterion {
 public:
  void require(bool cond, const std::string& what) {
    if (!cond && ok_) {
      ok_ = false;
      detail_ = what;
    }
  }
  void require_close(double got, double want, double tol,
                     const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: got %.12g, want %.12g (tol %g)",
                    what.c_str(), got, want, tol);
      require(false, buf);
    }
  }
  bool ok() const { return ok_; }
  const std::string& detail() const { return detail_; }

 private:
  bool ok_ = true;
  std::string detail_;
};

double unif(std::mt19937& rng) {
  return 2.0 * (static_cast<double>(rng()) /
                static_cast<double>(std::mt19937::max())) -
         1.0;
}

Matrix random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = unif(rng);
    }
  }
  return m;
}

Matrix random_spd(std::mt19937& rng, Eigen::Index n) {
  const Matrix g = random_matrix(rng, n, n);
  return g * g.transpose() + 0.3 * Matrix::Identity(n, n);
}

Matrix random_orthogonal(std::mt19937& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return Matrix(qr.householderQ());
}

// Random controllable agent pair within the stated size box.
std::pair<Matrix, Matrix> random_agent(std::mt19937& rng, Eigen::Index n,
                                       Eigen::Index p) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    Matrix a = random_matrix(rng, n, n);
    Matrix b = random_matrix(rng, n, p);
    if (structlqr::is_controllable(a, b)) {
      return {std::move(a), std::move(b)};
    }
  }
  throw structlqr::Error("could not draw a controllable pair");
}

MultiAgentProblem random_sync_problem(std::mt19937& rng, int n_agents,
                                      Eigen::Index n, Eigen::Index p) {
  auto [a, b] = random_agent(rng, n, p);
  Weights weights;
  weights.mode = WeightMode::homogeneous;
  weights.state_weight = random_spd(rng, n);
  weights.input_weight = random_spd(rng, p);
  return MultiAgentProblem(ProblemKind::sync, n_agents, std::move(a),
                           std::move(b), std::move(weights));
}

// The two-agent reference configuration: unstable scalar agents, unit
// disagreement weight, identity input weight.
MultiAgentProblem reference_problem(double agent_a) {
  Weights weights;
  weights.mode = WeightMode::homogeneous;
  weights.state_weight = Matrix::Identity(1, 1);
  weights.input_weight = Matrix::Identity(1, 1);
  return MultiAgentProblem(ProblemKind::sync, 2,
                           Matrix::Constant(1, 1, agent_a),
                           Matrix::Ones(1, 1), weights);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------

// C1: the worked two-agent example, end to end, against its published
// numbers at print precision, with machine-level internal residuals.
void criterion_reference(Criterion& c) {
  const auto p = reference_problem(1.0);
  const auto rp = structlqr::build_sync_problem(p);
  const auto gain = structlqr::solve_sync(p);

  const double tol_print = 1e-3;
  c.require_close(gain.p_value(0, 0), 2.4142, tol_print, "reduced value");
  c.require(gain.k_reduced.rows() == 2 && gain.k_reduced.cols() == 1,
            "reduced gain shape");
  c.require_close(gain.k_reduced(0, 0), 1.7071, tol_print, "k_reduced[0]");
  c.require_close(gain.k_reduced(1, 0), -1.7071, tol_print, "k_reduced[1]");

  Matrix expected_k(2, 2);
  expected_k << -1.2071, 1.2071, 1.2071, -1.2071;
  c.require(max_abs(gain.k_full - expected_k) <= tol_print, "full gain");

  // Closed-loop spectrum {1, -1.4142}.
  const Matrix a_cl = structlqr::stacked_drift(p) +
                      structlqr::stacked_input(p) * gain.k_full;
  const auto spec = structlqr::eig(a_cl);
  std::vector<double> re;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    re.push_back(spec.eigenvalues(i).real());
  }
  std::sort(re.begin(), re.end());
  c.require(re.size() == 2, "closed-loop spectrum size");
  c.require_close(re[0], -1.4142, tol_print, "stable closed-loop eigenvalue");
  c.require_close(re[1], 1.0, tol_print, "agreement closed-loop eigenvalue");

  // Pulled-back optimal value matrix and the strong stacked solution.
  const Matrix x_opt = structlqr::value_matrix(gain, rp.output);
  Matrix expected_opt(2, 2);
  expected_opt << 1.2071, -1.2071, -1.2071, 1.2071;
  c.require(max_abs(x_opt - expected_opt) <= tol_print, "optimal value matrix");

  const CareProblem stacked(structlqr::stacked_drift(p),
                            structlqr::stacked_input(p),
                            structlqr::stacked_state_weight(rp), rp.r);
  const auto strong = structlqr::solve_care_stabilizing(stacked);
  Matrix expected_strong(2, 2);
  expected_strong << 2.2071, -0.2071, -0.2071, 2.2071;
  c.require(max_abs(strong.x - expected_strong) <= tol_print,
            "strong stacked solution");

  Matrix expected_diff = Matrix::Constant(2, 2, -1.0);
  c.require(max_abs(x_opt - strong.x - expected_diff) <= tol_print,
            "solution difference");

  c.require(gain.certificates.at("are_residual") <= 1e-9,
            "reduced equation residual");
  c.require(strong.residual <= 1e-9, "stacked equation residual");
}

// C2: the optimality gap exists exactly when the drift has an unstable
// direction the cost cannot see; removing it restores agreement between the
// full-state and reduced syntheses.
void criterion_gap(Criterion& c) {
  const auto unstable = reference_problem(1.0);
  const auto rp = structlqr::build_sync_problem(unstable);
  const auto report = structlqr::gap_analysis(
      structlqr::stacked_drift(unstable), structlqr::stacked_state_weight(rp));
  c.require(report.gap_exists, "gap on the unstable reference");
  c.require(report.unstable_undetectable_modes.size() == 1, "one gap mode");
  if (!report.unstable_undetectable_modes.empty()) {
    const auto& mode = report.unstable_undetectable_modes.front();
    c.require_close(mode.eigenvalue.real(), 1.0, 1e-8, "gap eigenvalue");
    c.require(std::abs(mode.eigenvalue.imag()) <= 1e-8, "gap eigenvalue real");
    const double overlap = std::abs(mode.eigenvector(0) / kRoot2 +
                                    mode.eigenvector(1) / kRoot2);
    c.require_close(overlap, 1.0, 1e-8, "gap eigenvector alignment");
  }

  // Same layout with a stable agent: no gap, and the stacked regulator
  // reproduces the lifted reduced gain.
  const auto stable = reference_problem(-1.0);
  const auto rp_stable = structlqr::build_sync_problem(stable);
  const auto no_gap = structlqr::gap_analysis(
      structlqr::stacked_drift(stable),
      structlqr::stacked_state_weight(rp_stable));
  c.require(!no_gap.gap_exists, "no gap on the stable variant");

  const auto gain = structlqr::solve_sync(stable);
  const CareProblem stacked(structlqr::stacked_drift(stable),
                            structlqr::stacked_input(stable),
                            structlqr::stacked_state_weight(rp_stable),
                            rp_stable.r);
  const auto full = structlqr::solve_care_stabilizing(stacked);
  const Matrix k_direct =
      -rp_stable.r.llt().solve(structlqr::stacked_input(stable).transpose() *
                               full.x);
  c.require((gain.k_full - k_direct).norm() <= 1e-7,
            "full-state gain equals the lifted gain");
}

// C3: every synthesized synchronizing gain is diffusive: it annihilates the
// agreement subspace, so the law is expressible in pairwise differences.
void criterion_diffusive(Criterion& c) {
  std::mt19937 rng(7001u);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_agents = 2 + static_cast<int>(rng() % 4);  // up to 5
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 2);
    const auto problem = random_sync_problem(rng, n_agents, n, p);
    const auto gain = (trial % 2 == 0)
                          ? structlqr::solve_sync(problem)
                          : structlqr::solve_sync_homogeneous(problem);
    const Matrix agreement =
        structlqr::kron(Vector::Ones(n_agents), Matrix::Identity(n, n));
    const double defect = (gain.k_full * agreement).norm();
    if (defect > 1e-10) {
      char buf[120];
      std::snprintf(buf, sizeof(buf),
                    "trial %d (N=%d n=%ld p=%ld): diffusive defect %.3g",
                    trial, n_agents, static_cast<long>(n),
                    static_cast<long>(p), defect);
      c.require(false, buf);
      return;
    }
  }
}

// C4: with per-agent weights, one n-dimensional solve reproduces the full
// reduction route: same gain, and the reduced value matrix is the per-agent
// solution repeated down the diagonal.
void criterion_fast_path(Criterion& c) {
  std::mt19937 rng(7002u);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_agents = 2 + static_cast<int>(rng() % 4);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 2);
    const auto problem = random_sync_problem(rng, n_agents, n, p);

    const auto fast = structlqr::solve_sync_homogeneous(problem);
    const auto general = structlqr::solve_sync(problem);
    const double gain_gap = (fast.k_full - general.k_full).norm();
    if (gain_gap > 1e-8) {
      char buf[120];
      std::snprintf(buf, sizeof(buf), "trial %d: gain routes differ by %.3g",
                    trial, gain_gap);
      c.require(false, buf);
      return;
    }

    const CareProblem per_agent(problem.a, problem.b,
                                problem.weights.state_weight,
                                problem.weights.input_weight);
    const auto y = structlqr::solve_care_stabilizing(per_agent);
    const Matrix expected = structlqr::kron(
        Matrix::Identity(n_agents - 1, n_agents - 1), y.x);
    const double value_gap = (fast.p_value - expected).norm();
    if (value_gap > 1e-9) {
      char buf[120];
      std::snprintf(buf, sizeof(buf), "trial %d: value matrix off by %.3g",
                    trial, value_gap);
      c.require(false, buf);
      return;
    }
  }
}

// C5: centroid problems with a shared input weight produce a broadcast: all
// agent blocks identical, and the aggregate value solves the n-dimensional
// equation p a + a^T p - N p b w^{-1} b^T p + q = 0.
void criterion_broadcast(Criterion& c) {
  std::mt19937 rng(7003u);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_agents = 1 + static_cast<int>(rng() % 5);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 2);
    auto [a, b] = random_agent(rng, n, p);
    Weights weights;
    weights.mode = WeightMode::homogeneous;
    weights.state_weight = random_spd(rng, n);
    weights.input_weight = random_spd(rng, p);
    const MultiAgentProblem problem(ProblemKind::centroid, n_agents, a, b,
                                    weights);
    const auto gain = structlqr::solve_centroid(problem);

    // Identical blocks.
    const Matrix first = gain.k_reduced.topRows(p);
    for (int i = 1; i < n_agents; ++i) {
      const double spread =
          (gain.k_reduced.middleRows(i * p, p) - first).norm();
      if (spread > 1e-12) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), "trial %d: block %d differs by %.3g",
                      trial, i, spread);
        c.require(false, buf);
        return;
      }
    }

    // Independent residual of the aggregate equation.
    const Matrix p_sum = gain.p_value / static_cast<double>(n_agents);
    const Matrix w_inv_bt =
        weights.input_weight.llt().solve(b.transpose());
    const Matrix residual = p_sum * a + a.transpose() * p_sum -
                            static_cast<double>(n_agents) * p_sum * b *
                                w_inv_bt * p_sum +
                            weights.state_weight;
    if (residual.norm() > 1e-9) {
      char buf[120];
      std::snprintf(buf, sizeof(buf), "trial %d: aggregate residual %.3g",
                    trial, residual.norm());
      c.require(false, buf);
      return;
    }
    c.require(gain.certificates.at("sum_care_residual") <= 1e-9,
              "solver-reported aggregate residual");
  }

  // Scalar instance against the quadratic-formula oracle.
  Weights weights;
  weights.mode = WeightMode::homogeneous;
  weights.state_weight = Matrix::Ones(1, 1);
  weights.input_weight = Matrix::Ones(1, 1);
  const MultiAgentProblem scalar(ProblemKind::centroid, 2, Matrix::Ones(1, 1),
                                 Matrix::Ones(1, 1), weights);
  const auto gain = structlqr::solve_centroid(scalar);
  const double p_sum = gain.p_value(0, 0) / 2.0;
  // Positive root of 2 p^2 - 2 p - 1 = 0.
  const double oracle = (1.0 + kRoot3) / 2.0;
  c.require_close(p_sum, oracle, 1e-10, "scalar aggregate value");
}

// C6: the synthesized gain does not depend on which orthonormal basis of the
// disagreement subspace parameterizes the reduction.
void criterion_basis_invariance(Criterion& c) {
  std::mt19937 rng(7004u);
  const auto problem = random_sync_problem(rng, 4, 2, 1);
  const auto baseline = structlqr::solve_sync(problem);
  const auto sub = structlqr::disagreement_basis(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix u = random_orthogonal(rng, 3);
    const auto alt =
        structlqr::solve_sync_with_basis(problem, sub.basis * u);
    const double gap = (alt.k_full - baseline.k_full).norm();
    if (gap > 1e-9) {
      char buf[120];
      std::snprintf(buf, sizeof(buf), "rotation %d changes the gain by %.3g",
                    trial, gap);
      c.require(false, buf);
      return;
    }
  }
}

// C7: the simulated quadratic cost of the reference reduced loop agrees with
// the optimal value at print precision and with the Lyapunov exact cost far
// below it.
void criterion_cost(Criterion& c) {
  const auto p = reference_problem(1.0);
  const auto rp = structlqr::build_sync_problem(p);
  const auto gain = structlqr::solve_sync(p);

  const Matrix a_cl = rp.a_reduced + rp.b_reduced * gain.k_reduced;
  Vector y0(1);
  y0 << 1.0;
  auto traj = structlqr::simulate_closed_loop(a_cl, y0, 10.0, 1e-3);
  const double j = structlqr::evaluate_cost(traj, rp.q_reduced,
                                            gain.k_reduced, rp.r);

  const double expected = gain.p_value(0, 0);  // y0 = 1
  c.require(std::abs(j - expected) <= 1e-3 * expected,
            "cost vs optimal value at print precision");

  Matrix weight = rp.q_reduced +
                  gain.k_reduced.transpose() * rp.r * gain.k_reduced;
  weight = 0.5 * (weight + weight.transpose());
  const Matrix x_cl = structlqr::solve_lyapunov(a_cl, weight);
  const double exact = x_cl(0, 0);
  c.require(std::abs(j - exact) <= 1e-6 * exact,
            "cost vs Lyapunov exact value");
}

// C8: the sampled figure data reflects the structure: the optimal value
// surface vanishes on the agreement line, and the effective drift field is
// constant along translates of the output kernel.
void criterion_figures(Criterion& c) {
  const auto p = reference_problem(1.0);
  const auto rp = structlqr::build_sync_problem(p);
  const auto gain = structlqr::solve_sync(p);
  const Matrix x_opt = structlqr::value_matrix(gain, rp.output);

  const int res = 41;
  const auto surface = structlqr::surface_grid(x_opt, 2.0, res);
  for (size_t i = 0; i < surface.grid_points.size(); ++i) {
    const auto& pt = surface.grid_points[i];
    if (pt(0) == pt(1) && std::abs(surface.values[i]) > 1e-12) {
      char buf[120];
      std::snprintf(buf, sizeof(buf),
                    "surface value %.3g on the agreement line at x=%.3g",
                    surface.values[i], pt(0));
      c.require(false, buf);
      return;
    }
  }

  const auto field = structlqr::effective_field_grid(
      structlqr::stacked_drift(p), rp.output, 2.0, res);
  for (int i = 0; i + 1 < res; ++i) {
    for (int j = 0; j + 1 < res; ++j) {
      const auto& here = field.vectors[static_cast<size_t>(i) * res + j];
      const auto& there =
          field.vectors[static_cast<size_t>(i + 1) * res + (j + 1)];
      if ((here - there).norm() > 1e-12) {
        c.require(false, "field varies along a kernel translate");
        return;
      }
    }
  }
}

// C9: the subspace solver against the scalar closed form over the stated
// parameter grid.
void criterion_scalar_grid(Criterion& c) {
  for (double a = -2.0; a <= 2.0 + 1e-12; a += 0.5) {
    for (double b : {1.0, 2.0}) {
      for (double q : {0.5, 1.0, 2.0}) {
        for (double r : {0.5, 1.0, 2.0}) {
          const CareProblem problem(Matrix::Constant(1, 1, a),
                                    Matrix::Constant(1, 1, b),
                                    Matrix::Constant(1, 1, q),
                                    Matrix::Constant(1, 1, r));
          const auto sol = structlqr::solve_care_stabilizing(problem);
          const double oracle =
              r * (a + std::sqrt(a * a + q * b * b / r)) / (b * b);
          if (std::abs(sol.x(0, 0) - oracle) > 1e-12) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "a=%.2g b=%.2g q=%.2g r=%.2g: got %.15g want %.15g",
                          a, b, q, r, sol.x(0, 0), oracle);
            c.require(false, buf);
            return;
          }
        }
      }
    }
  }
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<void(Criterion&)> run;
  };
  const std::vector<Entry> criteria = {
      {"C1 two-agent reference reproduction", criterion_reference},
      {"C2 optimality gap detection", criterion_gap},
      {"C3 diffusive structure on random instances", criterion_diffusive},
      {"C4 homogeneous fast-path equivalence", criterion_fast_path},
      {"C5 broadcast structure and aggregate residual", criterion_broadcast},
      {"C6 disagreement-basis invariance", criterion_basis_invariance},
      {"C7 simulated cost consistency", criterion_cost},
      {"C8 figure-grid structural properties", criterion_figures},
      {"C9 scalar closed-form grid", criterion_scalar_grid},
  };

  int failures = 0;
  for (const Entry& entry : criteria) {
    Criterion c;
    try {
      entry.run(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    if (c.ok()) {
      std::cout << "[PASS] " << entry.name << "\n";
    } else {
      std::cout << "[FAIL] " << entry.name << ": " << c.detail() << "\n";
      ++failures;
    }
  }
  if (failures != 0) {
    std::cout << failures << " of " << criteria.size()
              << " criteria failed\n";
    return 1;
  }
  std::cout << "all " << criteria.size() << " criteria passed\n";
  return 0;
}
