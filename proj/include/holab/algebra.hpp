#pragma once

// Tagged domain types over the liealg kernel: ambient matrix groups with
// membership residuals, algebra bases with structure constants, and
// bracket-generated subalgebra spans.

#include "holab/liealg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace holab {

enum class MatrixFamily {
  GeneralLinear,      // no defining relation
  SpecialOrthogonal,  // group: M^T M = I, det > 0; algebra: X^T = -X
};

struct MatrixGroup {
  std::string name;  // tag shared by AlgebraElement/GroupElement
  int size = 0;
  MatrixFamily family = MatrixFamily::GeneralLinear;
  double membership_tol = 1e-8;

  Matrix identity() const { return Matrix::Identity(size, size); }

  // max-abs residual of the algebra's defining relation (0 for gl)
  double algebra_residual(const Matrix& x) const;
  // max-abs residual of the group's defining relation; +inf when |det|<1e-12
  double group_residual(const Matrix& g) const;

  void require_algebra(const Matrix& x) const;
  void require_group(const Matrix& g) const;

  static MatrixGroup special_orthogonal(int n);
  static MatrixGroup general_linear(int n);
};

struct AlgebraElement {
  Matrix value;
  std::string algebra;  // ambient algebra tag
};

struct GroupElement {
  Matrix value;
  std::string group;
};

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y);
GroupElement exp_element(const AlgebraElement& x);
AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& x);

// Frobenius inner product <A,B> = tr(A^T B); the geometry every span below
// is orthonormal in.
inline double frobenius_dot(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

// so(n) basis L_{ij} = E_ji - E_ij, ordered (0,1),(0,2),(1,2),...
// For n = 3 the order is L_x, L_y, L_z up to sign conventions below.
std::vector<Matrix> so_basis(int n);
Matrix so3_Lx();
Matrix so3_Ly();
Matrix so3_Lz();
Matrix so2_J();

struct AlgebraBasis {
  std::string name;
  int matrix_size = 0;
  std::vector<Matrix> elements;
  // structure_constants[k](i,j) = c^k_{ij} with [e_i,e_j] = sum_k c^k_{ij} e_k
  std::vector<Matrix> structure_constants;

  int rank() const { return static_cast<int>(elements.size()); }

  void compute_structure_constants();
  // linear independence (smallest singular value of the flattened stack) and
  // structure-constant reproduction within struct_tol
  void validate(double rank_tol = 1e-8, double struct_tol = 1e-10) const;

  static AlgebraBasis so(int n);
  static AlgebraBasis from_json_text(const std::string& text);
};

struct GenerationStep {
  int parent_i = -1;  // indices into the orthonormal basis at that depth
  int parent_j = -1;
  int depth = 0;      // bracket depth; 0 for the orthonormalized generators
  double new_component = 0.0;
};

// Orthonormalized basis of a bracket-generated subalgebra plus its
// generation log. Invariants: pairwise Frobenius-orthonormal to 1e-10 and
// closed under bracket to rank_tolerance.
struct SubalgebraSpan {
  std::vector<Matrix> basis;
  std::vector<GenerationStep> log;
  double rank_tolerance = 1e-8;
  int matrix_size = 0;

  int rank() const { return static_cast<int>(basis.size()); }
  Matrix project(const Matrix& x) const;
  double distance(const Matrix& x) const;  // Frobenius norm of the orthogonal part
  double max_orthonormality_residual() const;
  double max_bracket_closure_residual() const;
};

// Iterated brackets with singular-value rank detection until the rank
// stabilizes. rank_tolerance is relative to the largest singular value.
// All-zero generators give a rank-0 span.
SubalgebraSpan bracket_closure(const std::vector<Matrix>& generators,
                               double rank_tolerance = 1e-8);

struct AdStabilityEntry {
  int probe = 0;
  int basis = 0;
  double residual = 0.0;
};

struct AdStabilityReport {
  double max_residual = 0.0;
  std::vector<AdStabilityEntry> entries;
};

// Distance of Ad_g(b) to the span for every probe g and basis vector b.
AdStabilityReport ad_stability_check(const SubalgebraSpan& span,
                                     const std::vector<Matrix>& probes);

// Probes exp(+scale*b_i), exp(-scale*b_i) for every basis vector.
std::vector<Matrix> ad_probes(const SubalgebraSpan& span, double scale = 1.0);

}  // namespace holab
