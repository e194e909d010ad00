#pragma once

// Loop algebra over the lift: concatenation, reversal, stationary
// normalization, holonomy records, loop equivalence, the six path-lifting
// axioms as a numerical property suite, and flatness detection on supplied
// deformation families.

#include "holab/bundle.hpp"

#include <array>

namespace holab {

struct Loop {
  SmoothPath path;   // stationary ends after normalization
  Vector basepoint;  // path(0)
  std::string id;
};

// Normalizes (flat reparametrization when needed) and checks the closure gap
// modulo the chart periods: ||path(1) - path(0)|| <= 1e-12 after reduction.
Loop make_loop(SmoothPath path, const BaseChart& chart, std::string id = "loop");

Loop reverse(const Loop& loop);

struct HolonomyRecord {
  std::string loop_id;
  Matrix element;        // fiber(1) = fiber(0) * element
  Matrix log;            // principal matrix logarithm when log_ok
  bool log_ok = false;
  int steps = 0;
  double group_residual = 0.0;
  double exp_log_residual = 0.0;  // ||exp(log) - element||_F when log_ok
};

// Element h with fiber(1) = fiber(0) h. With the right-derivative transport
// convention this is start^{-1} W(1) start, so changing the start fiber
// conjugates the element exactly.
HolonomyRecord holonomy_element(const ConnectionData& conn, const Loop& loop,
                                const Matrix& start, int steps);

// gamma ~ gamma2 iff hol(reverse(gamma2) v gamma) is within tol of the
// identity; cross-checked against direct comparison of the two lifted
// endpoint fibers from the same starts.
bool loops_equivalent(const ConnectionData& conn, const Loop& gamma, const Loop& gamma2,
                      double tol, int steps);

// One test case for the axiom suite: an open path (with a continuation for
// the concatenation axiom), a loop for the triviality axiom, a start fiber,
// and extra fiber starts for axiom (vi).
struct AxiomCase {
  SmoothPath gamma;        // axioms (i), (iii), (iv), (v)
  SmoothPath continuation; // starts at gamma(1); axiom (ii)
  Loop loop;               // axiom (vi)
  Matrix start;
  std::vector<Matrix> fiber_starts;  // axiom (vi) sample of the fiber
};

struct AxiomCaseReport {
  std::array<double, 6> residual{};  // per axiom (i)..(vi)
  bool triviality_consistent = true;
};

struct AxiomSuiteReport {
  std::array<double, 6> max_residual{};
  std::vector<AxiomCaseReport> cases;
  bool triviality_consistent = true;

  bool pass(double tol) const {
    if (!triviality_consistent) return false;
    for (double r : max_residual)
      if (!(r <= tol)) return false;
    return true;
  }
};

// Numerical check of Def pl (i)-(vi) on the lifting induced by the
// connection:
//  (i)   projection identity           pi o L_x(gamma) = gamma
//  (ii)  concatenation splitting       L_x(g2 v g1) = L_{L_x(g1)(1)}(g2) v L_x(g1)
//  (iii) monotone reparametrization    L_x(gamma o g) = L_x(gamma) o g
//  (iv)  backtracking cancellation     L_x(gamma^{-1} v gamma)(1) = x
//  (v)   initial condition             L_x(gamma)(0) = x
//  (vi)  start-independent triviality, via the conjugation identity on a
//        finite fiber sample
AxiomSuiteReport axiom_suite(const ConnectionData& conn, const std::vector<AxiomCase>& cases,
                             double tol, int steps);

enum class Flatness { NotFlat, Flat, TotallyFlat };

// A smooth 1-parameter family of loops H(s, .) at a fixed basepoint.
struct LoopHomotopy {
  std::string name;
  std::function<Loop(double)> at;  // s in [0,1]
};

struct FlatnessFamilyResult {
  std::string name;
  double holonomy_variation = 0.0;   // max ||h(s) - h(0)||_F over the family
  double max_identity_distance = 0.0;
};

struct FlatnessReport {
  Flatness verdict = Flatness::NotFlat;  // relative to the tested family
  std::vector<FlatnessFamilyResult> families;
  double tol = 0.0;
};

FlatnessReport flatness_check(const ConnectionData& conn,
                              const std::vector<LoopHomotopy>& families, double tol, int steps,
                              int s_samples = 11);

const char* flatness_name(Flatness f);

}  // namespace holab
