#pragma once

// Plot-based smooth-space layer.
//
// Membership of a candidate plot in a diffeology is undecidable for black-box
// evaluators, so is_plot is a semi-decision procedure: it accepts when it can
// exhibit a witnessing construction (constant plot, factorization through a
// generator via a probe-smooth test map, gluing over an explicit finite
// cover, or the construction-specific rules of product/trace/projective
// diffeologies), and rejections only mean "no witness found at this probe
// resolution". Sound on accept relative to the probes, incomplete on reject.

#include "holab/core.hpp"
#include "holab/smoothness.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace holab {

using MapFn = std::function<Vector(const Vector&)>;
using PredicateFn = std::function<bool(const Vector&)>;
using ScalarMap = std::function<double(const Vector&)>;
using Contour = std::function<Vector(double)>;

// A p-plot: an evaluable parametrization of an open box in R^p into the
// model space R^d. p = 0 denotes a constant plot.
struct Plot {
  Box domain;
  int target_dim = 0;
  MapFn eval;
  std::string label;
  MapFn inverse;           // optional local inverse (charts); enables fast factorization
  std::vector<Box> cover;  // optional explicit finite cover for the gluing axiom

  int dim() const { return domain.dim(); }
  Vector operator()(const Vector& u) const { return eval(u); }
};

Plot identity_plot(const Box& box, std::string label = "identity");
Plot constant_plot(int domain_dim, const Vector& value, std::string label = "constant");

struct MembershipOptions {
  ProbeOptions probe{2, 1e-6, 257};  // order-2 kink detection by default
  int probe_budget = 3;              // probe lines per factorization attempt
  int grid = 9;                      // per-axis residual-check grid
  double match_tol = 1e-6;           // factorization residual tolerance (relative)
  double constant_tol = 1e-9;
  std::uint64_t seed = 42;
};

enum class WitnessKind { Constant, Factored, Glued, Projected, Rejected };

struct MembershipResult {
  bool accepted = false;
  WitnessKind kind = WitnessKind::Rejected;
  int generator = -1;     // witnessing generator for Factored
  double residual = 0.0;  // match residual, or the failing quantity on rejection
  std::string detail;     // witnessing construction or failure description

  explicit operator bool() const { return accepted; }
};

// Which closure axioms membership applies lazily.
struct ClosurePolicy {
  bool constants = true;
  bool chain_rule = true;
  bool gluing = true;
};

class Diffeology {
 public:
  static Diffeology generated(int space_dim, std::vector<Plot> generators);
  // standard diffeology of an open box in R^d (identity chart generator)
  static Diffeology standard(const Box& box);

  // Push-forward along f (asserted surjective onto the new model subset;
  // checked on samples only): generators become f o (generators). The
  // quotient diffeology is this with f the class projection.
  Diffeology pushforward(const MapFn& f, int new_dim, const std::string& label) const;

  static Diffeology product(Diffeology first, Diffeology second);

  // Plots of the parent whose sampled image satisfies the predicate.
  Diffeology trace(PredicateFn predicate, const std::string& label) const;

  struct ConnectingMap {
    int from = 0;  // factor indices
    int to = 0;
    MapFn map;     // i_{to,from} with proj_to = map o proj_from on samples
  };

  // Finite truncation of a projective family: candidate accepted iff every
  // composition with a projection is accepted in its factor. Connecting maps
  // are validated on a sample grid of `sample_region`; inconsistency raises
  // PreconditionError.
  static Diffeology projective_limit(std::vector<Diffeology> factors,
                                     std::vector<MapFn> projections,
                                     const std::vector<ConnectingMap>& connecting,
                                     const Box& sample_region);

  int space_dim() const { return space_dim_; }
  const std::vector<Plot>& generators() const { return generators_; }
  void add_generator(Plot p);

  ClosurePolicy closure_policy;

  MembershipResult is_plot(const Plot& candidate, const MembershipOptions& opt = {}) const;

 private:
  enum class Kind { Generated, Product, Trace, ProjectiveLimit };

  Kind kind_ = Kind::Generated;
  int space_dim_ = 0;
  std::vector<Plot> generators_;

  // Product / Trace / ProjectiveLimit structure
  std::vector<std::shared_ptr<const Diffeology>> children_;
  std::vector<MapFn> projections_;  // projective limit
  PredicateFn predicate_;           // trace
  int split_ = 0;                   // product: dim of the first factor

  MembershipResult membership_generated(const Plot& candidate, const MembershipOptions&) const;
};

// Operation-level entry point matching the membership contract: probe_budget
// must be >= 1.
MembershipResult is_plot(const Plot& candidate, const Diffeology& diff, int probe_budget,
                         const MembershipOptions& opt = {});

// Frolicher structure generated by a family of scalar maps: contours are the
// curves all generating functions compose smoothly with; functions are probed
// against a stored witness family of contours (lines through the region that
// themselves pass the contour test, plus any caller-registered contours).
// F_g is contained in the generated function set by construction.
struct FroelicherStructure {
  int space_dim = 0;
  std::vector<ScalarMap> generating_functions;
  std::vector<Contour> witness_contours;
  ProbeOptions probe{2, 1e-6, 257};

  bool contour_test(const Contour& c) const;
  bool function_test(const ScalarMap& h) const;
  // registers c as a witness iff it passes contour_test; returns acceptance
  bool add_witness(const Contour& c);
};

FroelicherStructure froelicher_generate(std::vector<ScalarMap> generating, int space_dim,
                                        const Box& region, int witness_lines = 8,
                                        std::uint64_t seed = 42);

// JSON loading: generator list with evaluators from the built-in registry
// ("identity", "circle") or component expressions in t (p=1) / u1..up.
Diffeology diffeology_from_json_text(const std::string& text);

}  // namespace holab
