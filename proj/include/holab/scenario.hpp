#pragma once

// Scenario registry: built-in geometries plus user JSON (schema_version 1).
// A scenario bundles a chart, a structure group with its algebra basis, a
// connection, named loop families, homotopy families, declared properties,
// and the policy for seeded random Fourier loops.

#include "holab/curvature.hpp"

namespace holab {

struct ScenarioProperties {
  bool flat = false;
  bool abelian = false;
  std::string reducible_to;             // descriptive, empty when none declared
  std::vector<Matrix> reducible_basis;  // candidate reduced-algebra basis
};

struct RandomLoopPolicy {
  Vector center;
  double radius = 0.5;
  int harmonics = 3;
};

struct Scenario {
  std::string name;
  MatrixGroup group;
  AlgebraBasis algebra;
  ConnectionData connection;
  std::vector<Loop> loops;
  std::vector<LoopHomotopy> homotopies;
  ScenarioProperties properties;
  RandomLoopPolicy random_policy;
  std::string notes;

  Loop random_loop(Rng& rng, const std::string& id) const;
  SmoothPath random_path(Rng& rng) const;

  const Loop* find_loop(const std::string& id) const;
};

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// Built-in name, or a path to a scenario JSON file.
Scenario load_scenario(const std::string& name_or_path);
Scenario scenario_from_json_text(const std::string& text, const std::string& source_name);

// Latitude loop of the sphere chart (colatitude phi0), used by the sphere
// scenario and the closed-form holonomy oracle.
Loop sphere_latitude_loop(const BaseChart& chart, double phi0);

}  // namespace holab
