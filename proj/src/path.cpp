#include "holab/path.hpp"

#include <algorithm>
#include <cmath>

namespace holab {

namespace {

double sigma(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// exp(-1/t)/t^2 in log space: the direct form underflows to 0/0 for tiny t
// (nested flat_step compositions do reach that range).
double sigma_deriv(double t) {
  return t > 0.0 ? std::exp(-1.0 / t - 2.0 * std::log(t)) : 0.0;
}

}  // namespace

double flat_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = sigma(t), b = sigma(1.0 - t);
  return a / (a + b);
}

double flat_step_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = sigma(t), b = sigma(1.0 - t);
  const double da = sigma_deriv(t), db = -sigma_deriv(1.0 - t);
  const double s = a + b;
  return (da * s - a * (da + db)) / (s * s);
}

Vector SmoothPath::velocity(double t, double fd_step) const {
  if (deriv) return deriv(t);
  const double h = fd_step;
  // anchor the five-point stencil inside [0,1]
  double base = std::clamp(t, 2.0 * h, 1.0 - 2.0 * h);
  if (1.0 < 4.0 * h) base = 0.5;  // degenerate: extremely coarse step
  const double o = (t - base) / h;  // in [-2,2]
  // Lagrange derivative weights for f'(base + o*h) on nodes base + {-2..2}h
  double w[5];
  const double nodes[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  for (int j = 0; j < 5; ++j) {
    double acc = 0.0;
    for (int m = 0; m < 5; ++m) {
      if (m == j) continue;
      double prod = 1.0;
      for (int k = 0; k < 5; ++k) {
        if (k == j || k == m) continue;
        prod *= (o - nodes[k]) / (nodes[j] - nodes[k]);
      }
      acc += prod / (nodes[j] - nodes[m]);
    }
    w[j] = acc;
  }
  Vector v = Vector::Zero(dim);
  for (int j = 0; j < 5; ++j) v += w[j] * eval(base + nodes[j] * h);
  return v / h;
}

void SmoothPath::resample(int n) {
  samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) samples[static_cast<std::size_t>(i)] = eval(i / (n - 1.0));
}

SmoothPath make_path(int dim, std::function<Vector(double)> eval,
                     std::function<Vector(double)> deriv, int samples) {
  SmoothPath p;
  p.dim = dim;
  p.eval = std::move(eval);
  p.deriv = std::move(deriv);
  p.resample(samples);
  return p;
}

SmoothPath path_from_expressions(const std::vector<Expr>& components, const Env& fixed) {
  const int d = static_cast<int>(components.size());
  if (d == 0) throw InputError("path_from_expressions: no components");
  std::vector<Expr> derivs;
  derivs.reserve(components.size());
  for (const Expr& e : components) derivs.push_back(e.derivative("t"));
  auto eval = [components, fixed, d](double t) {
    Env env = fixed;
    env.set("t", t);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = components[static_cast<std::size_t>(i)].eval(env);
    return x;
  };
  auto deriv = [derivs, fixed, d](double t) {
    Env env = fixed;
    env.set("t", t);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = derivs[static_cast<std::size_t>(i)].eval(env);
    return x;
  };
  return make_path(d, std::move(eval), std::move(deriv));
}

SmoothPath constant_path(const Vector& point) {
  const int d = static_cast<int>(point.size());
  Vector copy = point;
  SmoothPath p = make_path(
      d, [copy](double) { return copy; }, [d](double) { return Vector::Zero(d).eval(); });
  p.stationary_ends = true;
  return p;
}

SmoothPath line_path(const Vector& from, const Vector& to) {
  Vector a = from, b = to;
  Vector d = b - a;
  return make_path(
      static_cast<int>(a.size()), [a, d](double t) { return (a + t * d).eval(); },
      [d](double) { return d; });
}

SmoothPath reparametrize_flat(const SmoothPath& p) {
  SmoothPath q;
  q.dim = p.dim;
  auto eval = p.eval;
  q.eval = [eval](double t) { return eval(flat_step(t)); };
  if (p.deriv) {
    auto deriv = p.deriv;
    q.deriv = [deriv](double t) { return (flat_step_deriv(t) * deriv(flat_step(t))).eval(); };
  }
  q.stationary_ends = true;
  q.resample(static_cast<int>(p.samples.size()));
  return q;
}

SmoothPath reverse(const SmoothPath& p) {
  SmoothPath q;
  q.dim = p.dim;
  auto eval = p.eval;
  q.eval = [eval](double t) { return eval(1.0 - t); };
  if (p.deriv) {
    auto deriv = p.deriv;
    q.deriv = [deriv](double t) { return (-deriv(1.0 - t)).eval(); };
  }
  q.stationary_ends = p.stationary_ends;
  q.resample(static_cast<int>(p.samples.size()));
  return q;
}

SmoothPath concat(const SmoothPath& second, const SmoothPath& first) {
  if (first.dim != second.dim) throw ShapeError("concat: dimension mismatch");
  const double gap = (first.end() - second.start()).norm();
  if (gap > 1e-10)
    throw JoinError("concat: endpoint mismatch " + format_double(gap) +
                    " exceeds 1e-10");
  SmoothPath a = reparametrize_flat(first);
  SmoothPath b = reparametrize_flat(second);
  SmoothPath q;
  q.dim = first.dim;
  auto ea = a.eval, eb = b.eval;
  q.eval = [ea, eb](double t) {
    return t < 0.5 ? ea(2.0 * t) : eb(2.0 * t - 1.0);
  };
  auto da = a.deriv, db = b.deriv;
  if (da && db) {
    q.deriv = [da, db](double t) {
      return t < 0.5 ? (2.0 * da(2.0 * t)).eval() : (2.0 * db(2.0 * t - 1.0)).eval();
    };
  }
  q.stationary_ends = true;
  q.resample(static_cast<int>(std::max(first.samples.size(), second.samples.size())));
  return q;
}

SmoothPath restrict_to(const SmoothPath& p, double t_end) {
  if (!(t_end > 0.0 && t_end <= 1.0)) throw InputError("restrict_to: t_end must be in (0,1]");
  SmoothPath q;
  q.dim = p.dim;
  auto eval = p.eval;
  q.eval = [eval, t_end](double t) { return eval(t_end * t); };
  if (p.deriv) {
    auto deriv = p.deriv;
    q.deriv = [deriv, t_end](double t) { return (t_end * deriv(t_end * t)).eval(); };
  }
  q.resample(static_cast<int>(p.samples.size()));
  return q;
}

namespace {

struct FourierCoeffs {
  // per-dimension sin/cos coefficients, cos terms are (cos(2 pi k u) - 1)
  std::vector<Vector> a, b;
  Vector drift;
};

SmoothPath build_fourier(const Vector& center, const FourierCoeffs& coeffs, const Box& bounds,
                         double radius, double margin) {
  const int d = static_cast<int>(center.size());
  const int harmonics = static_cast<int>(coeffs.a.size());
  Vector c0 = center;
  auto raw = [c0, coeffs, d, harmonics](double u) {
    Vector x = c0 + u * coeffs.drift;
    for (int k = 1; k <= harmonics; ++k) {
      const double w = 2.0 * kPi * k;
      x += std::sin(w * u) * coeffs.a[static_cast<std::size_t>(k - 1)] +
           (std::cos(w * u) - 1.0) * coeffs.b[static_cast<std::size_t>(k - 1)];
    }
    return x;
  };
  auto raw_deriv = [coeffs, d, harmonics](double u) {
    Vector x = coeffs.drift;
    for (int k = 1; k <= harmonics; ++k) {
      const double w = 2.0 * kPi * k;
      x += w * std::cos(w * u) * coeffs.a[static_cast<std::size_t>(k - 1)] -
           w * std::sin(w * u) * coeffs.b[static_cast<std::size_t>(k - 1)];
    }
    return x;
  };

  // scale the oscillation so the image stays within both the radius ball
  // around the center and the margin-shrunk box
  double worst = 0.0;
  for (int i = 0; i <= 512; ++i) {
    const Vector dev = raw(i / 512.0) - c0;
    worst = std::max(worst, dev.cwiseAbs().maxCoeff());
  }
  double allowed = radius;
  for (int i = 0; i < d; ++i) {
    const double w = bounds.hi[i] - bounds.lo[i];
    allowed = std::min(allowed, c0[i] - (bounds.lo[i] + margin * w));
    allowed = std::min(allowed, (bounds.hi[i] - margin * w) - c0[i]);
  }
  if (allowed <= 0.0) throw DomainError("fourier loop: center too close to chart boundary");
  const double scale = worst > allowed ? allowed / worst : 1.0;

  auto eval = [raw, c0, scale](double t) {
    const double u = flat_step(t);
    return (c0 + scale * (raw(u) - c0)).eval();
  };
  auto deriv = [raw_deriv, scale](double t) {
    const double u = flat_step(t);
    return (scale * flat_step_deriv(t) * raw_deriv(u)).eval();
  };
  SmoothPath p = make_path(d, std::move(eval), std::move(deriv));
  p.stationary_ends = true;
  return p;
}

FourierCoeffs draw_coeffs(int dim, int harmonics, Rng& rng, double drift_scale) {
  FourierCoeffs c;
  c.drift = Vector::Zero(dim);
  for (int k = 1; k <= harmonics; ++k) {
    c.a.push_back((rng.normal_vector(dim) / (k * k)).eval());
    c.b.push_back((rng.normal_vector(dim) / (k * k)).eval());
  }
  if (drift_scale > 0.0) c.drift = drift_scale * rng.normal_vector(dim);
  return c;
}

}  // namespace

SmoothPath fourier_loop(const Vector& center, int harmonics, Rng& rng, const Box& bounds,
                        double radius, double margin) {
  if (harmonics < 1) throw InputError("fourier_loop: need at least one harmonic");
  return build_fourier(center, draw_coeffs(static_cast<int>(center.size()), harmonics, rng, 0.0),
                       bounds, radius, margin);
}

SmoothPath fourier_path(const Vector& center, int harmonics, Rng& rng, const Box& bounds,
                        double radius, double margin) {
  if (harmonics < 1) throw InputError("fourier_path: need at least one harmonic");
  return build_fourier(center,
                       draw_coeffs(static_cast<int>(center.size()), harmonics, rng, 0.7),
                       bounds, radius, margin);
}

}  // namespace holab
