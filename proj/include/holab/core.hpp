#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace holab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. Library code throws; the CLI maps anything derived from
// Error to exit code 1, check failures (not exceptions) to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct InputError : Error {
  using Error::Error;
};
struct JoinError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  ValidationError(const std::string& field_path, const std::string& message)
      : Error(field_path + ": " + message), path(field_path) {}
  std::string path;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Open axis-aligned box in R^p. p = 0 is allowed (domain of a constant plot).
struct Box {
  Vector lo;
  Vector hi;

  Box() : lo(0), hi(0) {}
  Box(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw ShapeError("Box: lo/hi size mismatch");
    for (int i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw InputError("Box: empty interval on axis " + std::to_string(i));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  static Box cube(int dim, double a, double b) {
    return Box(Vector::Constant(dim, a), Vector::Constant(dim, b));
  }

  Vector center() const { return 0.5 * (lo + hi); }
  Vector widths() const { return hi - lo; }
  double min_width() const { return dim() == 0 ? 0.0 : (hi - lo).minCoeff(); }

  bool contains(const Vector& x, double margin = 0.0) const {
    if (x.size() != lo.size()) throw ShapeError("Box::contains: dimension mismatch");
    for (int i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
    return true;
  }

  // Affine map from [0,1]^p grid coordinates into the box interior.
  Vector at_fraction(const Vector& f, double inset = 1e-9) const {
    Vector x(dim());
    for (int i = 0; i < dim(); ++i) {
      double w = hi[i] - lo[i];
      x[i] = lo[i] + inset * w + f[i] * (1.0 - 2.0 * inset) * w;
    }
    return x;
  }
};

// Deterministic RNG: splitmix64 stream with a fixed Box-Muller transform.
// Unlike std::normal_distribution this produces identical streams on every
// platform, which the byte-stable report invariant relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// 17 significant digits: round-trips doubles exactly and is byte-stable.
std::string format_double(double x);

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace holab
