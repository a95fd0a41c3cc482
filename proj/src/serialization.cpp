#include "structlqr/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace structlqr {

namespace {

Json complex_to_json(Complex z) {
  return Json::array({round_to_output_precision(z.real()),
                      round_to_output_precision(z.imag())});
}

bool is_number(const Json& j) { return j.is_number(); }

// Shape checks shared by the schema validator: a non-empty rectangular
// nested array of finite numbers.
bool check_matrix_shape(const Json& j, const std::string& pointer,
                        std::vector<SchemaIssue>& issues) {
  if (!j.is_array() || j.empty()) {
    issues.push_back({pointer, "expected a non-empty array of rows"});
    return false;
  }
  size_t cols = 0;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.empty()) {
      issues.push_back({pointer + "/" + std::to_string(i),
                        "expected a non-empty row array"});
      return false;
    }
    if (i == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      issues.push_back({pointer + "/" + std::to_string(i),
                        "row length differs from the first row"});
      return false;
    }
    for (size_t k = 0; k < row.size(); ++k) {
      if (!is_number(row[k])) {
        issues.push_back({pointer + "/" + std::to_string(i) + "/" +
                              std::to_string(k),
                          "expected a number"});
        return false;
      }
      const double v = row[k].get<double>();
      if (!std::isfinite(v)) {
        issues.push_back({pointer + "/" + std::to_string(i) + "/" +
                              std::to_string(k),
                          "expected a finite number"});
        return false;
      }
    }
  }
  return true;
}

}  // namespace

double round_to_output_precision(double v) {
  if (!std::isfinite(v)) {
    return v;
  }
  if (v == 0.0) {
    return 0.0;  // fold negative zero
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(round_to_output_precision(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(complex_to_json(v(i)));
  }
  return out;
}

Json to_json(const Spectrum& s) {
  return to_json(s.eigenvalues);
}

Json to_json(const RiccatiSolution& s) {
  Json j;
  j["x"] = to_json(s.x);
  j["residual"] = round_to_output_precision(s.residual);
  j["closed_loop_spectrum"] = to_json(s.closed_loop_spectrum);
  j["is_strong"] = s.is_strong;
  j["is_stabilizing"] = s.is_stabilizing;
  j["newton_iterations"] = s.newton_iterations;
  return j;
}

Json to_json(const GainResult& g) {
  Json j;
  j["k_full"] = to_json(g.k_full);
  j["k_reduced"] = to_json(g.k_reduced);
  j["p_value"] = to_json(g.p_value);
  j["structure_tag"] = to_string(g.structure_tag);
  Json certs;
  for (const auto& [name, value] : g.certificates) {
    certs[name] = round_to_output_precision(value);
  }
  j["certificates"] = std::move(certs);
  if (!g.note.empty()) {
    j["note"] = g.note;
  }
  return j;
}

Json to_json(const GapReport& r) {
  Json j;
  j["gap_exists"] = r.gap_exists;
  Json modes = Json::array();
  for (const GapMode& mode : r.unstable_undetectable_modes) {
    Json m;
    m["eigenvalue"] = complex_to_json(mode.eigenvalue);
    m["eigenvector"] = to_json(mode.eigenvector);
    modes.push_back(std::move(m));
  }
  j["unstable_undetectable_modes"] = std::move(modes);
  j["f_factor"] = to_json(r.f_factor);
  return j;
}

Json to_json(const CareProblem& p) {
  Json j;
  j["a"] = to_json(p.a);
  j["b"] = to_json(p.b);
  j["q"] = to_json(p.q);
  j["r"] = to_json(p.r);
  return j;
}

Matrix matrix_from_json(const Json& j, const std::string& context) {
  std::vector<SchemaIssue> issues;
  if (!check_matrix_shape(j, context, issues)) {
    throw Error(context + ": " + issues.front().message);
  }
  Matrix m(static_cast<Eigen::Index>(j.size()),
           static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      m(i, k) = j[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
    }
  }
  return m;
}

std::vector<SchemaIssue> validate_problem_json(const Json& j) {
  std::vector<SchemaIssue> issues;
  if (!j.is_object()) {
    issues.push_back({"", "problem document must be a JSON object"});
    return issues;
  }

  std::string kind;
  if (!j.contains("kind") || !j["kind"].is_string()) {
    issues.push_back({"/kind", "required string, \"sync\" or \"centroid\""});
  } else {
    kind = j["kind"].get<std::string>();
    if (kind != "sync" && kind != "centroid") {
      issues.push_back({"/kind", "must be \"sync\" or \"centroid\""});
    }
  }

  long long n_agents = 0;
  if (!j.contains("N") || !j["N"].is_number_integer()) {
    issues.push_back({"/N", "required integer agent count"});
  } else {
    n_agents = j["N"].get<long long>();
    if (n_agents < 1) {
      issues.push_back({"/N", "agent count must be at least 1"});
    }
  }

  Eigen::Index n = 0;
  Eigen::Index p = 0;
  bool a_ok = false;
  if (!j.contains("A")) {
    issues.push_back({"/A", "required agent drift matrix"});
  } else if (check_matrix_shape(j["A"], "/A", issues)) {
    if (j["A"].size() != j["A"][0].size()) {
      issues.push_back({"/A", "agent drift must be square"});
    } else {
      a_ok = true;
      n = static_cast<Eigen::Index>(j["A"].size());
    }
  }
  if (!j.contains("B")) {
    issues.push_back({"/B", "required agent input matrix"});
  } else if (check_matrix_shape(j["B"], "/B", issues)) {
    p = static_cast<Eigen::Index>(j["B"][0].size());
    if (a_ok && static_cast<Eigen::Index>(j["B"].size()) != n) {
      issues.push_back({"/B", "agent input must have one row per state"});
    }
  }

  if (!j.contains("weights") || !j["weights"].is_object()) {
    issues.push_back({"/weights", "required weights object"});
    return issues;
  }
  const Json& w = j["weights"];
  std::string mode;
  if (!w.contains("mode") || !w["mode"].is_string()) {
    issues.push_back(
        {"/weights/mode", "required string, \"homogeneous\" or \"full\""});
    return issues;
  }
  mode = w["mode"].get<std::string>();
  if (mode != "homogeneous" && mode != "full") {
    issues.push_back(
        {"/weights/mode", "must be \"homogeneous\" or \"full\""});
    return issues;
  }

  const std::string state_key = mode == "homogeneous" ? "V" : "Q";
  const std::string input_key = mode == "homogeneous" ? "W" : "R";
  const std::string state_ptr = "/weights/" + state_key;
  const std::string input_ptr = "/weights/" + input_key;

  auto check_weight = [&](const std::string& key, const std::string& pointer)
      -> const Json* {
    if (!w.contains(key)) {
      issues.push_back({pointer, "required weight matrix " + key});
      return nullptr;
    }
    if (!check_matrix_shape(w[key], pointer, issues)) {
      return nullptr;
    }
    const Json& m = w[key];
    if (m.size() != m[0].size()) {
      issues.push_back({pointer, "weight must be square"});
      return nullptr;
    }
    // Symmetry is structural: report the violation norm here rather than
    // failing later inside a constructor.
    const Matrix mat = matrix_from_json(m, pointer);
    const double defect = (mat - mat.transpose()).norm();
    if (defect > 1e-12 * std::max(1.0, mat.norm())) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "not symmetric (defect %.3g)", defect);
      issues.push_back({pointer, buf});
      return nullptr;
    }
    return &m;
  };

  const Json* state_w = check_weight(state_key, state_ptr);
  const Json* input_w = check_weight(input_key, input_ptr);

  if (a_ok && n_agents >= 1 && state_w != nullptr) {
    const auto rows = static_cast<Eigen::Index>(state_w->size());
    if (mode == "homogeneous" || kind == "centroid") {
      if (rows != n) {
        issues.push_back({state_ptr, "weight must be n x n"});
      }
    } else if (kind == "sync") {
      if (rows != (n_agents - 1) * n && rows != n_agents * n) {
        issues.push_back(
            {state_ptr, "weight must be (N-1)n x (N-1)n or Nn x Nn"});
      }
    }
  }
  if (p > 0 && n_agents >= 1 && input_w != nullptr) {
    const auto rows = static_cast<Eigen::Index>(input_w->size());
    if (mode == "homogeneous") {
      if (rows != p) {
        issues.push_back({input_ptr, "weight must be p x p"});
      }
    } else if (rows != n_agents * p) {
      issues.push_back({input_ptr, "weight must be Np x Np"});
    }
  }

  if (j.contains("x0")) {
    const Json& x0 = j["x0"];
    if (!x0.is_array() || x0.empty()) {
      issues.push_back({"/x0", "expected a non-empty array of numbers"});
    } else {
      for (size_t i = 0; i < x0.size(); ++i) {
        if (!is_number(x0[i]) || !std::isfinite(x0[i].get<double>())) {
          issues.push_back(
              {"/x0/" + std::to_string(i), "expected a finite number"});
          break;
        }
      }
      if (a_ok && n_agents >= 1 &&
          static_cast<long long>(x0.size()) != n_agents * n) {
        issues.push_back({"/x0", "initial state must have Nn entries"});
      }
    }
  }

  return issues;
}

ProblemFile parse_problem(const Json& j) {
  const ProblemKind kind = j["kind"].get<std::string>() == "sync"
                               ? ProblemKind::sync
                               : ProblemKind::centroid;
  const int n_agents = j["N"].get<int>();
  Matrix a = matrix_from_json(j["A"], "/A");
  Matrix b = matrix_from_json(j["B"], "/B");

  const Json& w = j["weights"];
  Weights weights;
  if (w["mode"].get<std::string>() == "homogeneous") {
    weights.mode = WeightMode::homogeneous;
    weights.state_weight = matrix_from_json(w["V"], "/weights/V");
    weights.input_weight = matrix_from_json(w["W"], "/weights/W");
  } else {
    weights.mode = WeightMode::full;
    weights.state_weight = matrix_from_json(w["Q"], "/weights/Q");
    weights.input_weight = matrix_from_json(w["R"], "/weights/R");
  }

  ProblemFile file{
      MultiAgentProblem(kind, n_agents, std::move(a), std::move(b),
                        std::move(weights)),
      std::nullopt};
  if (j.contains("x0")) {
    const Json& x0j = j["x0"];
    Vector x0(static_cast<Eigen::Index>(x0j.size()));
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      x0(i) = x0j[static_cast<size_t>(i)].get<double>();
    }
    file.x0 = std::move(x0);
  }
  return file;
}

}  // namespace structlqr
