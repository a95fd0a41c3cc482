#pragma once

#include <json.hpp>

#include <optional>

#include "structlqr/multiagent.hpp"
#include "structlqr/riccati.hpp"

namespace structlqr {

using Json = nlohmann::ordered_json;

/// Rounds to 9 significant digits; every number that leaves the toolkit
/// passes through here so reruns produce byte-identical artifacts.
double round_to_output_precision(double v);

/// Matrices serialize as nested row arrays, complex numbers as [re, im]
/// pairs, spectra as lists of such pairs.
Json to_json(const Matrix& m);
Json to_json(const ComplexVector& v);
Json to_json(const Spectrum& s);
Json to_json(const RiccatiSolution& s);
Json to_json(const GainResult& g);
Json to_json(const GapReport& r);
Json to_json(const CareProblem& p);

/// Parses a nested row array; rejects ragged rows and non-finite entries.
/// The context string names the offending field in error messages.
Matrix matrix_from_json(const Json& j, const std::string& context);

/// One structural defect in a problem file, located by JSON pointer.
struct SchemaIssue {
  std::string pointer;
  std::string message;
};

/// Parsed problem file: the problem plus the optional initial state for
/// simulation runs.
struct ProblemFile {
  MultiAgentProblem problem;
  std::optional<Vector> x0;
};

/// Structural validation of a problem JSON document: required keys, types,
/// shapes, weight symmetry. Returns all defects found (empty means the
/// document can be handed to parse_problem).
std::vector<SchemaIssue> validate_problem_json(const Json& j);

/// Builds the problem from a structurally valid document. Semantic failures
/// (definiteness, controllability) surface as Error from the constructors.
ProblemFile parse_problem(const Json& j);

}  // namespace structlqr
