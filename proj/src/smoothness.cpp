#include "holab/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace holab {

namespace {

// max |order-j difference quotient| at the given stride, on the normalized
// grid h = 1/(n-1). Binomial forward windows; only the max norm is used, so
// the window anchor is irrelevant.
double max_quotient(const std::vector<double>& f, int j, int stride) {
  const int n = static_cast<int>(f.size());
  std::vector<double> binom(static_cast<std::size_t>(j) + 1);
  binom[0] = 1.0;
  for (int m = 1; m <= j; ++m)
    binom[static_cast<std::size_t>(m)] =
        binom[static_cast<std::size_t>(m - 1)] * (j - m + 1) / m;
  const double h = static_cast<double>(stride) / (n - 1);
  const double scale = std::pow(h, j);
  double best = 0.0;
  for (int i = 0; i + j * stride < n; ++i) {
    double acc = 0.0;
    for (int m = 0; m <= j; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      acc += sign * binom[static_cast<std::size_t>(m)] *
             f[static_cast<std::size_t>(i + (j - m) * stride)];
    }
    best = std::max(best, std::abs(acc) / scale);
  }
  return best;
}

}  // namespace

bool smoothness_probe(const std::vector<double>& samples, int order, double tol) {
  if (order < 1) throw InputError("smoothness_probe: order must be >= 1");
  const int n = static_cast<int>(samples.size());
  if (n < 2 * order + 2)
    throw InputError("smoothness_probe: need at least 2*order+2 samples, got " +
                     std::to_string(n));

  double fmax = 0.0;
  for (double s : samples) {
    if (!std::isfinite(s)) return false;
    fmax = std::max(fmax, std::abs(s));
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const double growth = 1.6;

  for (int j = 1; j <= order; ++j) {
    std::vector<int> strides;
    for (int s : {4, 2, 1})
      if ((n - 1) / s >= j + 1) strides.push_back(s);  // coarse to fine
    if (strides.size() < 2) continue;                  // nothing to compare against

    std::vector<double> m;
    for (int s : strides) m.push_back(max_quotient(samples, j, s));

    bool diverges = true;
    for (std::size_t level = 1; level < m.size(); ++level) {
      const int stride = strides[level];
      // round-off amplification of a j-th quotient plus the absolute floor
      const double floor =
          64.0 * eps * std::max(1.0, fmax) * std::pow((n - 1.0) / stride, j) +
          tol * std::max(1.0, fmax);
      if (!(m[level] > growth * m[level - 1] + floor)) {
        diverges = false;
        break;
      }
    }
    if (diverges) return false;
  }
  return true;
}

bool probe_scalar_map(const std::function<double(double)>& f, double a, double b,
                      const ProbeOptions& opt) {
  if (!(a < b)) throw InputError("probe_scalar_map: empty interval");
  std::vector<double> samples(static_cast<std::size_t>(opt.samples));
  for (int i = 0; i < opt.samples; ++i)
    samples[static_cast<std::size_t>(i)] = f(a + (b - a) * i / (opt.samples - 1));
  return smoothness_probe(samples, opt.order, opt.tol);
}

bool probe_curve(const std::function<Vector(double)>& c, double a, double b,
                 const ProbeOptions& opt) {
  if (!(a < b)) throw InputError("probe_curve: empty interval");
  std::vector<Vector> values(static_cast<std::size_t>(opt.samples));
  for (int i = 0; i < opt.samples; ++i)
    values[static_cast<std::size_t>(i)] = c(a + (b - a) * i / (opt.samples - 1));
  const int d = static_cast<int>(values[0].size());
  std::vector<double> coord(static_cast<std::size_t>(opt.samples));
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < opt.samples; ++i)
      coord[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i)][k];
    if (!smoothness_probe(coord, opt.order, opt.tol)) return false;
  }
  return true;
}

}  // namespace holab
