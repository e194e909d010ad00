#pragma once

// Connections on the trivialized principal bundle P = chart x G and the
// horizontal-lift / parallel-transport ODE.
//
// Conventions, pinned here and asserted by tests:
//  - theta at (x, g) on a tangent (v, Xg) with Xg the right-translated fiber
//    velocity (g-dot g^{-1}) is  Ad_{g^{-1}}( A(x, v) + Xg ). Pure-fiber
//    tangents generated by xi return xi, and theta transforms by Ad_{h^{-1}}
//    under the right action.
//  - a horizontal lift of gamma starting at `start` is (gamma(t), W(t)*start)
//    with W' W^{-1} = -A(gamma(t), gamma'(t)), W(0) = e; theta vanishes on
//    its velocity identically, lifting is right-equivariant, and holonomy
//    composes as hol(g2 v g1) = hol(g2) hol(g1).

#include "holab/algebra.hpp"
#include "holab/path.hpp"
#include "holab/smoothness.hpp"

namespace holab {

// Base chart: an open box with optional per-axis periods (0 = aperiodic) for
// quotient charts (torus, longitude), plus an optional display embedding.
struct BaseChart {
  int dim = 0;
  Box domain;
  std::string name;
  std::vector<double> periods;                 // empty or size dim; 0 = none
  std::function<Vector(const Vector&)> embedding;  // optional, into R^D

  // reduce x - ref to the fundamental cell around ref on periodic axes
  Vector reduce_gap(const Vector& gap) const;
  bool contains(const Vector& x, double margin = 0.0) const;
};

// g-valued local connection 1-form A on the chart, stored componentwise so
// linearity in the tangent argument holds structurally:
// A(x, v) = sum_i v_i comp[i](x).
struct ConnectionData {
  BaseChart chart;
  MatrixGroup group;
  std::vector<std::function<Matrix(const Vector&)>> comp;
  // optional exact exterior derivative dA(x)(v,w); antisymmetric in (v,w)
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> exact_dA;

  Matrix local_form(const Vector& x, const Vector& v) const;
  bool has_exact_dA() const { return static_cast<bool>(exact_dA); }

  // max residual of A(x, av+bw) = a A(x,v) + b A(x,w) over random samples
  double linearity_residual(int trials = 20, std::uint64_t seed = 42) const;
};

// theta at the trivialized point (x, g); fiber_velocity is right-translated
// (g-dot g^{-1}). Pure vertical tangents from xi in g return xi.
Matrix theta_eval(const ConnectionData& conn, const Vector& x, const Matrix& g,
                  const Vector& v, const Matrix& fiber_velocity);

struct InvarianceProbe {
  Vector x;
  Matrix g;
  Matrix h;
  Vector v;
  Matrix fiber_velocity;
};

std::vector<InvarianceProbe> make_invariance_probes(const ConnectionData& conn, int count,
                                                    std::uint64_t seed = 42);

// Max residual of the right-invariance law theta_{(x, gh)}((R_h)_* Y) =
// Ad_{h^{-1}} theta_{(x,g)}(Y) over the probes. A self-consistency check of
// the trivialized construction, expected ~ 0.
double right_invariance_residual(const ConnectionData& conn,
                                 const std::vector<InvarianceProbe>& probes);

struct LiftedPath {
  SmoothPath base;
  std::vector<Matrix> fiber;  // fiber[i] at t = i/steps, fiber[0] = start
  Matrix start;
  int steps = 0;
  double max_group_residual = 0.0;  // structure-group relation drift

  const Matrix& end_fiber() const { return fiber.back(); }
  const Matrix& fiber_at_node(int i) const { return fiber.at(static_cast<std::size_t>(i)); }
};

// Solves the fiber ODE with the 4th-order Magnus kernel; pi o lift = gamma by
// construction. Requires steps >= 8 and the path inside the chart.
LiftedPath horizontal_lift(const ConnectionData& conn, const SmoothPath& gamma,
                           const Matrix& start, int steps);

// Pt(gamma, t, start): evaluated by an exact affinely re-timed lift of
// gamma|[0,t], not by interpolation between nodes.
Matrix parallel_transport(const ConnectionData& conn, const SmoothPath& gamma, double t,
                          const Matrix& start, int steps);

// ConnectionData from a symbolic term list sum_k c_k(x) dx_{i_k} (x) basis_{j_k};
// coefficients are expressions in x, y, z / x1..xd. The exterior derivative is
// attached symbolically.
struct ConnectionTerm {
  Expr coeff;
  int dx = 0;     // which dx_i
  int basis = 0;  // which algebra basis element
};

ConnectionData connection_from_terms(BaseChart chart, MatrixGroup group,
                                     const AlgebraBasis& algebra,
                                     const std::vector<ConnectionTerm>& terms);

}  // namespace holab
