#include "holab/algebra.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>

namespace holab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// MatrixGroup

double MatrixGroup::algebra_residual(const Matrix& x) const {
  if (x.rows() != size || x.cols() != size)
    throw ShapeError("algebra_residual: expected " + std::to_string(size) + "x" +
                     std::to_string(size));
  if (family == MatrixFamily::SpecialOrthogonal)
    return (x + x.transpose()).cwiseAbs().maxCoeff();
  return 0.0;
}

double MatrixGroup::group_residual(const Matrix& g) const {
  if (g.rows() != size || g.cols() != size)
    throw ShapeError("group_residual: expected " + std::to_string(size) + "x" +
                     std::to_string(size));
  const double det = g.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    return std::numeric_limits<double>::infinity();
  double r = 0.0;
  if (family == MatrixFamily::SpecialOrthogonal) {
    r = (g.transpose() * g - Matrix::Identity(size, size)).cwiseAbs().maxCoeff();
    if (det < 0) r = std::max(r, 2.0);  // wrong component of O(n)
  }
  return r;
}

void MatrixGroup::require_algebra(const Matrix& x) const {
  const double r = algebra_residual(x);
  if (!(r <= membership_tol))
    throw InputError(name + " algebra membership residual " + format_double(r) +
                     " exceeds tolerance");
}

void MatrixGroup::require_group(const Matrix& g) const {
  const double r = group_residual(g);
  if (!(r <= membership_tol))
    throw InputError(name + " group membership residual " + format_double(r) +
                     " exceeds tolerance");
}

MatrixGroup MatrixGroup::special_orthogonal(int n) {
  return MatrixGroup{"SO(" + std::to_string(n) + ")", n, MatrixFamily::SpecialOrthogonal, 1e-8};
}

MatrixGroup MatrixGroup::general_linear(int n) {
  return MatrixGroup{"GL(" + std::to_string(n) + ")", n, MatrixFamily::GeneralLinear, 1e-8};
}

// ---------------------------------------------------------------------------
// tagged ops

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.algebra != y.algebra)
    throw ShapeError("bracket: algebra tag mismatch (" + x.algebra + " vs " + y.algebra + ")");
  return AlgebraElement{bracket<double>(x.value, y.value), x.algebra};
}

GroupElement exp_element(const AlgebraElement& x) {
  return GroupElement{matrix_exp<double>(x.value), x.algebra};
}

AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& x) {
  if (g.value.rows() != x.value.rows())
    throw ShapeError("adjoint: size mismatch between group and algebra elements");
  return AlgebraElement{adjoint(g.value, x.value), x.algebra};
}

// ---------------------------------------------------------------------------
// principal logarithm

LogResult matrix_log_principal(const Matrix& g) {
  if (g.rows() != g.cols()) throw ShapeError("matrix_log_principal: argument must be square");
  if (!g.allFinite()) throw NumericError("matrix_log_principal: non-finite entries");
  const int n = static_cast<int>(g.rows());
  const Matrix id = Matrix::Identity(n, n);

  // Eigenvalues on the closed negative real axis put g outside the principal
  // domain; flag instead of failing.
  Eigen::EigenSolver<Matrix> es(g, /*computeEigenvectors=*/false);
  for (int i = 0; i < n; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (ev.real() <= 0.0 && std::abs(ev.imag()) < 1e-10 * std::max(1.0, std::abs(ev.real())))
      return LogResult{Matrix::Zero(n, n), false, 0.0};
  }

  // Inverse scaling: Denman-Beavers square roots until close to I.
  Matrix a = g;
  int sqrt_count = 0;
  while ((a - id).cwiseAbs().maxCoeff() > 0.25) {
    Matrix y = a, z = id;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      Matrix yn = 0.5 * (y + z.inverse());
      Matrix zn = 0.5 * (z + y.inverse());
      if (!yn.allFinite() || !zn.allFinite()) break;
      const double delta = (yn - y).cwiseAbs().maxCoeff();
      y = yn;
      z = zn;
      if (delta < 1e-15 * std::max(1.0, y.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
    }
    if (!converged) return LogResult{Matrix::Zero(n, n), false, 0.0};
    a = y;
    if (++sqrt_count > 50) return LogResult{Matrix::Zero(n, n), false, 0.0};
  }

  // Mercator series log(I + E), ||E|| <= 1/4.
  const Matrix e = a - id;
  Matrix power = e;
  Matrix sum = Matrix::Zero(n, n);
  for (int k = 1; k <= 60; ++k) {
    sum += (k % 2 == 1 ? 1.0 : -1.0) / k * power;
    power = power * e;
    if (power.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  Matrix log = std::pow(2.0, sqrt_count) * sum;
  const double residual = (matrix_exp<double>(log) - g).norm();
  return LogResult{std::move(log), true, residual};
}

// ---------------------------------------------------------------------------
// product integral

std::vector<Matrix> product_integral(const std::function<Matrix(double)>& v, int steps) {
  if (!v) throw InputError("product_integral: empty integrand");
  return magnus_flow(v, steps, DerivSide::Right);
}

namespace {

// 4-point Lagrange interpolation on a uniform grid of [0,1].
Matrix interp_samples(const std::vector<Matrix>& samples, double t) {
  const int m = static_cast<int>(samples.size()) - 1;  // intervals
  if (m == 0) return samples[0];
  double u = std::clamp(t, 0.0, 1.0) * m;
  int cell = std::min(static_cast<int>(u), m - 1);
  int i0 = std::clamp(cell - 1, 0, std::max(0, m - 3));
  if (m < 3) i0 = 0;
  const int pts = std::min(4, m + 1);
  double x = u - i0;
  Matrix acc = Matrix::Zero(samples[0].rows(), samples[0].cols());
  for (int j = 0; j < pts; ++j) {
    double w = 1.0;
    for (int k = 0; k < pts; ++k)
      if (k != j) w *= (x - k) / (j - k);
    acc += w * samples[static_cast<std::size_t>(i0 + j)];
  }
  return acc;
}

}  // namespace

std::vector<Matrix> product_integral(const std::vector<Matrix>& samples, int steps) {
  if (samples.empty()) throw InputError("product_integral: empty sample path");
  if (steps < 1) throw InputError("product_integral: steps must be >= 1");
  if (static_cast<int>(samples.size()) < steps + 1)
    throw InputError("product_integral: need at least steps+1 uniform samples");
  for (const Matrix& s : samples)
    if (s.rows() != samples[0].rows() || s.cols() != samples[0].cols())
      throw ShapeError("product_integral: inconsistent sample shapes");
  return magnus_flow([&](double t) { return interp_samples(samples, t); }, steps,
                     DerivSide::Right);
}

// ---------------------------------------------------------------------------
// bases

std::vector<Matrix> so_basis(int n) {
  if (n < 2) throw InputError("so_basis: n must be >= 2");
  std::vector<Matrix> basis;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Matrix m = Matrix::Zero(n, n);
      m(j, i) = 1.0;
      m(i, j) = -1.0;
      basis.push_back(std::move(m));
    }
  return basis;
}

Matrix so3_Lx() {
  Matrix m = Matrix::Zero(3, 3);
  m(2, 1) = 1.0;
  m(1, 2) = -1.0;
  return m;
}

Matrix so3_Ly() {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 2) = 1.0;
  m(2, 0) = -1.0;
  return m;
}

Matrix so3_Lz() {
  Matrix m = Matrix::Zero(3, 3);
  m(1, 0) = 1.0;
  m(0, 1) = -1.0;
  return m;
}

Matrix so2_J() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  m(0, 1) = -1.0;
  return m;
}

namespace {

Matrix flatten_stack(const std::vector<Matrix>& mats) {
  if (mats.empty()) return Matrix(0, 0);
  const int n2 = static_cast<int>(mats[0].size());
  Matrix s(static_cast<int>(mats.size()), n2);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    Eigen::Map<const Vector> flat(mats[i].data(), n2);
    s.row(static_cast<int>(i)) = flat.transpose();
  }
  return s;
}

}  // namespace

void AlgebraBasis::compute_structure_constants() {
  const int r = rank();
  structure_constants.assign(static_cast<std::size_t>(r), Matrix::Zero(r, r));
  if (r == 0) return;
  // least squares against the flattened basis
  Matrix b = flatten_stack(elements).transpose();  // n^2 x r
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Matrix br = bracket<double>(elements[i], elements[j]);
      Eigen::Map<const Vector> flat(br.data(), br.size());
      Vector c = qr.solve(flat);
      for (int k = 0; k < r; ++k) structure_constants[static_cast<std::size_t>(k)](i, j) = c[k];
    }
}

void AlgebraBasis::validate(double rank_tol, double struct_tol) const {
  if (matrix_size <= 0) throw ValidationError("matrix_size", "must be positive");
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i].rows() != matrix_size || elements[i].cols() != matrix_size)
      throw ValidationError("basis[" + std::to_string(i) + "]",
                            "matrix does not match matrix_size");
  if (elements.empty()) return;
  Matrix s = flatten_stack(elements);
  Eigen::JacobiSVD<Matrix> svd(s);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > rank_tol))
    throw ValidationError("basis", "elements are not linearly independent (sigma_min = " +
                                       format_double(smin) + ")");
  if (structure_constants.size() != elements.size())
    throw ValidationError("structure_constants", "wrong outer size");
  const int r = rank();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Matrix expect = Matrix::Zero(matrix_size, matrix_size);
      for (int k = 0; k < r; ++k)
        expect += structure_constants[static_cast<std::size_t>(k)](i, j) * elements[k];
      const double res =
          (expect - bracket<double>(elements[i], elements[j])).cwiseAbs().maxCoeff();
      if (!(res <= struct_tol))
        throw ValidationError("structure_constants",
                              "do not reproduce bracket(e" + std::to_string(i) + ",e" +
                                  std::to_string(j) + "): residual " + format_double(res));
    }
}

AlgebraBasis AlgebraBasis::so(int n) {
  AlgebraBasis b;
  b.name = "so" + std::to_string(n);
  b.matrix_size = n;
  b.elements = so_basis(n);
  b.compute_structure_constants();
  return b;
}

AlgebraBasis AlgebraBasis::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError("", std::string("invalid JSON: ") + e.what());
  }
  AlgebraBasis b;
  if (!j.contains("name") || !j["name"].is_string())
    throw ValidationError("name", "missing or not a string");
  b.name = j["name"].get<std::string>();
  if (!j.contains("matrix_size") || !j["matrix_size"].is_number_integer())
    throw ValidationError("matrix_size", "missing or not an integer");
  b.matrix_size = j["matrix_size"].get<int>();
  if (b.matrix_size <= 0) throw ValidationError("matrix_size", "must be positive");
  if (!j.contains("basis") || !j["basis"].is_array())
    throw ValidationError("basis", "missing or not an array");
  const int n = b.matrix_size;
  for (std::size_t i = 0; i < j["basis"].size(); ++i) {
    const auto& row = j["basis"][i];
    const std::string path = "basis[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n * n)
      throw ValidationError(path, "expected " + std::to_string(n * n) + " row-major entries");
    Matrix m(n, n);
    for (int k = 0; k < n * n; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number())
        throw ValidationError(path + "[" + std::to_string(k) + "]", "not a number");
      m(k / n, k % n) = row[static_cast<std::size_t>(k)].get<double>();
    }
    b.elements.push_back(std::move(m));
  }
  b.compute_structure_constants();
  b.validate();
  return b;
}

// ---------------------------------------------------------------------------
// spans

Matrix SubalgebraSpan::project(const Matrix& x) const {
  Matrix p = Matrix::Zero(matrix_size, matrix_size);
  for (const Matrix& b : basis) p += frobenius_dot(b, x) * b;
  return p;
}

double SubalgebraSpan::distance(const Matrix& x) const {
  if (x.rows() != matrix_size || x.cols() != matrix_size)
    throw ShapeError("SubalgebraSpan::distance: size mismatch");
  return (x - project(x)).norm();
}

double SubalgebraSpan::max_orthonormality_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double expect = (i == j) ? 1.0 : 0.0;
      r = std::max(r, std::abs(frobenius_dot(basis[i], basis[j]) - expect));
    }
  return r;
}

double SubalgebraSpan::max_bracket_closure_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j)
      r = std::max(r, distance(bracket<double>(basis[i], basis[j])));
  return r;
}

namespace {

// Orthonormal basis (as matrices) of the row space of the stack, with rank
// detected by singular values relative to the largest.
std::vector<Matrix> orthonormalize(const std::vector<Matrix>& mats, int n, double rel_tol) {
  if (mats.empty()) return {};
  Matrix s = flatten_stack(mats);
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] <= 0.0) return {};
  std::vector<Matrix> basis;
  for (int k = 0; k < sigma.size(); ++k) {
    if (sigma[k] <= rel_tol * sigma[0]) break;
    Vector col = svd.matrixV().col(k);
    basis.push_back(Eigen::Map<const Matrix>(col.data(), n, n));
  }
  return basis;
}

}  // namespace

SubalgebraSpan bracket_closure(const std::vector<Matrix>& generators, double rank_tolerance) {
  if (generators.empty()) throw InputError("bracket_closure: empty generator list");
  const int n = static_cast<int>(generators[0].rows());
  for (const Matrix& g : generators)
    if (g.rows() != n || g.cols() != n)
      throw ShapeError("bracket_closure: generators must share one matrix size");

  SubalgebraSpan span;
  span.rank_tolerance = rank_tolerance;
  span.matrix_size = n;
  span.basis = orthonormalize(generators, n, rank_tolerance);
  for (int i = 0; i < static_cast<int>(span.basis.size()); ++i)
    span.log.push_back(GenerationStep{-1, -1, 0, 1.0});

  const int max_rank = n * n;
  for (int depth = 1; depth <= max_rank; ++depth) {
    const int r = span.rank();
    if (r == 0 || r == max_rank) break;
    std::vector<Matrix> stack = span.basis;
    bool grew = false;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        Matrix br = bracket<double>(span.basis[static_cast<std::size_t>(i)],
                                    span.basis[static_cast<std::size_t>(j)]);
        const double ortho = span.distance(br);
        if (ortho > rank_tolerance * std::max(1.0, br.norm())) {
          stack.push_back(std::move(br));
          span.log.push_back(GenerationStep{i, j, depth, ortho});
          grew = true;
        }
      }
    if (!grew) break;
    span.basis = orthonormalize(stack, n, rank_tolerance);
    if (static_cast<int>(span.basis.size()) == r) break;  // rank stabilized
  }
  return span;
}

AdStabilityReport ad_stability_check(const SubalgebraSpan& span,
                                     const std::vector<Matrix>& probes) {
  AdStabilityReport report;
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (std::size_t b = 0; b < span.basis.size(); ++b) {
      const double res = span.distance(adjoint(probes[p], span.basis[b]));
      report.entries.push_back(
          AdStabilityEntry{static_cast<int>(p), static_cast<int>(b), res});
      report.max_residual = std::max(report.max_residual, res);
    }
  return report;
}

std::vector<Matrix> ad_probes(const SubalgebraSpan& span, double scale) {
  std::vector<Matrix> probes;
  for (const Matrix& b : span.basis) {
    probes.push_back(matrix_exp<double>((scale * b).eval()));
    probes.push_back(matrix_exp<double>((-scale * b).eval()));
  }
  return probes;
}

}  // namespace holab
