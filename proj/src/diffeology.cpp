#include "holab/diffeology.hpp"

#include "holab/expression.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace holab {

Plot identity_plot(const Box& box, std::string label) {
  Plot p;
  p.domain = box;
  p.target_dim = box.dim();
  p.eval = [](const Vector& u) { return u; };
  p.inverse = [](const Vector& x) { return x; };
  p.label = std::move(label);
  return p;
}

Plot constant_plot(int domain_dim, const Vector& value, std::string label) {
  Plot p;
  p.domain = Box::cube(domain_dim, -1.0, 1.0);
  p.target_dim = static_cast<int>(value.size());
  Vector v = value;
  p.eval = [v](const Vector&) { return v; };
  p.label = std::move(label);
  return p;
}

namespace {

// Full grid over the box, per_axis points per axis; a 0-dimensional box
// yields the single empty point.
std::vector<Vector> grid_points(const Box& box, int per_axis) {
  const int p = box.dim();
  if (p == 0) return {Vector(0)};
  std::vector<Vector> pts;
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  for (;;) {
    Vector f(p);
    for (int i = 0; i < p; ++i)
      f[i] = per_axis == 1 ? 0.5 : idx[static_cast<std::size_t>(i)] / (per_axis - 1.0);
    pts.push_back(box.at_fraction(f, 1e-6));
    int axis = 0;
    while (axis < p && ++idx[static_cast<std::size_t>(axis)] == per_axis) {
      idx[static_cast<std::size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == p) break;
  }
  return pts;
}

// Gauss-Newton preimage search for gen(x) ~ target, seeded by `seed` or by a
// coarse grid scan. Returns the solution only if the residual meets tol_abs.
std::optional<Vector> preimage_point(const Plot& gen, const Vector& target,
                                     const std::optional<Vector>& seed, double tol_abs) {
  const int p = gen.dim();
  if (p == 0) {
    Vector u(0);
    return (gen.eval(u) - target).norm() <= tol_abs ? std::optional<Vector>(u) : std::nullopt;
  }

  if (gen.inverse) {
    Vector x = gen.inverse(target);
    if (x.size() == p && gen.domain.contains(x, 0.0) &&
        (gen.eval(x) - target).norm() <= tol_abs)
      return x;
    return std::nullopt;
  }

  Vector x;
  if (seed) {
    x = *seed;
  } else {
    // coarse scan; near-ties (multivalued preimages of periodic-style maps)
    // are broken toward the domain center so a continuity march that starts
    // here has room before hitting the boundary
    const int per_axis = p == 1 ? 129 : (p == 2 ? 33 : 9);
    const Vector center = gen.domain.center();
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& cand : grid_points(gen.domain, per_axis)) {
      const double r = (gen.eval(cand) - target).norm();
      if (r < best) best = r;
    }
    const double slack = best + 1e-3 * (1.0 + target.norm());
    double best_central = std::numeric_limits<double>::infinity();
    for (const Vector& cand : grid_points(gen.domain, per_axis)) {
      const double r = (gen.eval(cand) - target).norm();
      if (r <= slack && (cand - center).norm() < best_central) {
        best_central = (cand - center).norm();
        x = cand;
      }
    }
  }

  const Vector widths = gen.domain.widths();
  for (int iter = 0; iter < 40; ++iter) {
    const Vector r = gen.eval(x) - target;
    if (r.norm() <= 0.25 * tol_abs) break;
    Matrix jac(target.size(), p);
    for (int i = 0; i < p; ++i) {
      const double h = 1e-6 * widths[i];
      Vector xp = x, xm = x;
      xp[i] = std::min(xp[i] + h, gen.domain.hi[i] - 1e-12 * widths[i]);
      xm[i] = std::max(xm[i] - h, gen.domain.lo[i] + 1e-12 * widths[i]);
      jac.col(i) = (gen.eval(xp) - gen.eval(xm)) / (xp[i] - xm[i]);
    }
    Vector step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    // damped update, clamped into the closed domain
    double lambda = 1.0;
    const double r0 = r.norm();
    for (int back = 0; back < 8; ++back) {
      Vector xn = x + lambda * step;
      for (int i = 0; i < p; ++i)
        xn[i] = std::clamp(xn[i], gen.domain.lo[i] + 1e-12 * widths[i],
                           gen.domain.hi[i] - 1e-12 * widths[i]);
      if ((gen.eval(xn) - target).norm() < r0) {
        x = xn;
        break;
      }
      lambda *= 0.5;
      if (back == 7) iter = 40;  // stalled
    }
  }
  if ((gen.eval(x) - target).norm() <= tol_abs) return x;
  return std::nullopt;
}

// 1-D probe line through the candidate domain: s in [0,1] -> domain point.
struct ProbeLine {
  Vector origin;
  Vector direction;  // spans the full usable chord
  Vector at(double s) const { return origin + s * direction; }
};

std::vector<ProbeLine> make_probe_lines(const Box& box, int budget, std::uint64_t seed) {
  std::vector<ProbeLine> lines;
  const int p = box.dim();
  if (p == 0) return lines;
  const Vector c = box.center();
  const Vector w = box.widths();
  for (int i = 0; i < p; ++i) {
    ProbeLine l;
    l.origin = c;
    l.origin[i] = box.lo[i] + 1e-6 * w[i];
    l.direction = Vector::Zero(p);
    l.direction[i] = w[i] * (1.0 - 2e-6);
    lines.push_back(std::move(l));
  }
  Rng rng(seed);
  for (int k = 0; k < budget - 1; ++k) {
    Vector a(p), b(p);
    for (int i = 0; i < p; ++i) {
      a[i] = box.lo[i] + w[i] * (0.02 + 0.96 * rng.uniform());
      b[i] = box.lo[i] + w[i] * (0.02 + 0.96 * rng.uniform());
    }
    if ((b - a).norm() < 1e-9 * w.maxCoeff()) continue;
    lines.push_back(ProbeLine{a, (b - a).eval()});
  }
  return lines;
}

double image_scale(const Plot& candidate, const std::vector<Vector>& image) {
  double s = 0.0;
  for (const Vector& y : image) s = std::max(s, y.cwiseAbs().maxCoeff());
  (void)candidate;
  return 1.0 + s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diffeology constructors

Diffeology Diffeology::generated(int space_dim, std::vector<Plot> generators) {
  for (const Plot& g : generators)
    if (g.target_dim != space_dim)
      throw ShapeError("Diffeology::generated: generator '" + g.label +
                       "' maps into dimension " + std::to_string(g.target_dim) +
                       ", expected " + std::to_string(space_dim));
  Diffeology d;
  d.kind_ = Kind::Generated;
  d.space_dim_ = space_dim;
  d.generators_ = std::move(generators);
  return d;
}

Diffeology Diffeology::standard(const Box& box) {
  return generated(box.dim(), {identity_plot(box, "chart")});
}

Diffeology Diffeology::pushforward(const MapFn& f, int new_dim, const std::string& label) const {
  std::vector<Plot> gens;
  for (const Plot& g : generators_) {
    Plot composed;
    composed.domain = g.domain;
    composed.target_dim = new_dim;
    auto inner = g.eval;
    composed.eval = [f, inner](const Vector& u) { return f(inner(u)); };
    composed.label = label + " o " + g.label;
    composed.cover = g.cover;
    gens.push_back(std::move(composed));
  }
  // surjectivity is asserted by the caller; evaluability is checked here
  for (const Plot& g : gens)
    for (const Vector& u : grid_points(g.domain, g.dim() <= 1 ? 9 : 5)) {
      Vector y = g.eval(u);
      if (static_cast<int>(y.size()) != new_dim || !y.allFinite())
        throw InputError("pushforward: composed generator '" + g.label +
                         "' not evaluable on the image grid");
    }
  return generated(new_dim, std::move(gens));
}

Diffeology Diffeology::product(Diffeology first, Diffeology second) {
  Diffeology d;
  d.kind_ = Kind::Product;
  d.space_dim_ = first.space_dim_ + second.space_dim_;
  d.split_ = first.space_dim_;
  // materialized pairwise product generators
  for (const Plot& a : first.generators_)
    for (const Plot& b : second.generators_) {
      Plot prod;
      const int pa = a.dim(), pb = b.dim();
      Vector lo(pa + pb), hi(pa + pb);
      if (pa > 0) {
        lo.head(pa) = a.domain.lo;
        hi.head(pa) = a.domain.hi;
      }
      if (pb > 0) {
        lo.tail(pb) = b.domain.lo;
        hi.tail(pb) = b.domain.hi;
      }
      prod.domain = Box(lo, hi);
      prod.target_dim = d.space_dim_;
      auto ea = a.eval, eb = b.eval;
      const int da = first.space_dim_;
      const int db = second.space_dim_;
      prod.eval = [ea, eb, pa, pb, da, db](const Vector& u) {
        Vector y(da + db);
        y.head(da) = ea(u.head(pa).eval());
        y.tail(db) = eb(u.tail(pb).eval());
        return y;
      };
      prod.label = a.label + " x " + b.label;
      d.generators_.push_back(std::move(prod));
    }
  d.children_.push_back(std::make_shared<Diffeology>(std::move(first)));
  d.children_.push_back(std::make_shared<Diffeology>(std::move(second)));
  return d;
}

Diffeology Diffeology::trace(PredicateFn predicate, const std::string& label) const {
  Diffeology d;
  d.kind_ = Kind::Trace;
  d.space_dim_ = space_dim_;
  d.predicate_ = std::move(predicate);
  d.children_.push_back(std::make_shared<Diffeology>(*this));
  (void)label;
  return d;
}

Diffeology Diffeology::projective_limit(std::vector<Diffeology> factors,
                                        std::vector<MapFn> projections,
                                        const std::vector<ConnectingMap>& connecting,
                                        const Box& sample_region) {
  if (factors.empty()) throw InputError("projective_limit: empty family");
  if (factors.size() != projections.size())
    throw ShapeError("projective_limit: one projection per factor required");

  for (const ConnectingMap& cm : connecting) {
    if (cm.from < 0 || cm.to < 0 || cm.from >= static_cast<int>(factors.size()) ||
        cm.to >= static_cast<int>(factors.size()))
      throw InputError("projective_limit: connecting map indexes outside the family");
    double worst = 0.0;
    for (const Vector& x : grid_points(sample_region, sample_region.dim() <= 1 ? 17 : 7)) {
      const Vector via = cm.map(projections[static_cast<std::size_t>(cm.from)](x));
      const Vector direct = projections[static_cast<std::size_t>(cm.to)](x);
      worst = std::max(worst, (via - direct).cwiseAbs().maxCoeff());
    }
    if (worst > 1e-8)
      throw PreconditionError("projective_limit: connecting map " + std::to_string(cm.from) +
                              " -> " + std::to_string(cm.to) +
                              " inconsistent on samples (residual " + format_double(worst) +
                              ")");
  }

  Diffeology d;
  d.kind_ = Kind::ProjectiveLimit;
  d.space_dim_ = sample_region.dim();
  for (Diffeology& f : factors)
    d.children_.push_back(std::make_shared<Diffeology>(std::move(f)));
  d.projections_ = std::move(projections);
  return d;
}

void Diffeology::add_generator(Plot p) {
  if (kind_ != Kind::Generated)
    throw InputError("add_generator: only generated diffeologies are extensible");
  if (p.target_dim != space_dim_) throw ShapeError("add_generator: dimension mismatch");
  generators_.push_back(std::move(p));
}

// ---------------------------------------------------------------------------
// membership

MembershipResult Diffeology::membership_generated(const Plot& candidate,
                                                  const MembershipOptions& opt) const {
  const int p = candidate.dim();
  const int grid_axis = p <= 1 ? std::max(opt.grid, 9) : opt.grid;
  const std::vector<Vector> grid = grid_points(candidate.domain, grid_axis);
  std::vector<Vector> image;
  image.reserve(grid.size());
  for (const Vector& u : grid) image.push_back(candidate.eval(u));
  const double scale = image_scale(candidate, image);

  // axiom 1: constants
  if (closure_policy.constants) {
    double spread = 0.0;
    for (const Vector& y : image) spread = std::max(spread, (y - image[0]).cwiseAbs().maxCoeff());
    if (spread <= opt.constant_tol * scale || p == 0) {
      if (spread <= opt.constant_tol * scale) {
        // the constant value must lie in the model subset: some generator
        // must reach it
        for (std::size_t gi = 0; gi < generators_.size(); ++gi) {
          if (preimage_point(generators_[gi], image[0], std::nullopt, opt.match_tol * scale)) {
            MembershipResult r;
            r.accepted = true;
            r.kind = WitnessKind::Constant;
            r.generator = static_cast<int>(gi);
            r.detail = "constant plot at a point reached by generator '" +
                       generators_[gi].label + "'";
            return r;
          }
        }
        MembershipResult r;
        r.kind = WitnessKind::Rejected;
        r.detail = "constant value outside the sampled image of every generator";
        return r;
      }
    }
  }

  // axiom 3 (chain rule): factor through a generator via a probed test map
  std::string failure = "no generator factorization";
  if (closure_policy.chain_rule) {
    const std::vector<ProbeLine> lines = make_probe_lines(candidate.domain, opt.probe_budget,
                                                          opt.seed);
    for (std::size_t gi = 0; gi < generators_.size(); ++gi) {
      const Plot& gen = generators_[gi];
      bool ok = true;
      double worst_residual = 0.0;
      std::string why;

      // residual check on the grid (continuity-seeded raster order)
      std::optional<Vector> seed;
      for (const Vector& u : grid) {
        auto x = preimage_point(gen, candidate.eval(u), seed, opt.match_tol * scale);
        if (!x) {
          ok = false;
          why = "point " + std::to_string(&u - grid.data()) + " has no preimage";
          break;
        }
        worst_residual = std::max(worst_residual, (gen.eval(*x) - candidate.eval(u)).norm());
        seed = x;
      }

      // probe smoothness of the reconstructed test map along each line
      for (std::size_t li = 0; ok && li < lines.size(); ++li) {
        const ProbeLine& line = lines[li];
        const int n = opt.probe.samples;
        std::vector<Vector> params;
        params.reserve(static_cast<std::size_t>(n));
        std::optional<Vector> prev;
        for (int i = 0; i < n; ++i) {
          const Vector u = line.at(i / (n - 1.0));
          auto x = preimage_point(gen, candidate.eval(u), prev, opt.match_tol * scale);
          if (!x) {
            ok = false;
            why = "no preimage along probe line " + std::to_string(li);
            break;
          }
          params.push_back(*x);
          prev = x;
        }
        if (!ok) break;
        std::vector<double> coord(static_cast<std::size_t>(n));
        for (int k = 0; k < gen.dim(); ++k) {
          for (int i = 0; i < n; ++i)
            coord[static_cast<std::size_t>(i)] = params[static_cast<std::size_t>(i)][k];
          if (!smoothness_probe(coord, opt.probe.order, opt.probe.tol)) {
            ok = false;
            why = "test map coordinate " + std::to_string(k) + " failed the order-" +
                  std::to_string(opt.probe.order) + " probe on line " + std::to_string(li);
            break;
          }
        }
      }

      if (ok) {
        MembershipResult r;
        r.accepted = true;
        r.kind = WitnessKind::Factored;
        r.generator = static_cast<int>(gi);
        r.residual = worst_residual;
        r.detail = "factors through generator '" + gen.label +
                   "' via a probe-smooth test map";
        return r;
      }
      failure = "generator '" + gen.label + "': " + why;
    }
  }

  // gluing over an explicit finite cover
  if (closure_policy.gluing && !candidate.cover.empty()) {
    bool all = true;
    for (std::size_t ci = 0; ci < candidate.cover.size(); ++ci) {
      Plot piece = candidate;
      piece.domain = candidate.cover[ci];
      piece.cover.clear();
      MembershipResult sub = membership_generated(piece, opt);
      if (!sub.accepted) {
        all = false;
        failure = "cover piece " + std::to_string(ci) + " rejected: " + sub.detail;
        break;
      }
    }
    if (all) {
      MembershipResult r;
      r.accepted = true;
      r.kind = WitnessKind::Glued;
      r.detail = "glued from " + std::to_string(candidate.cover.size()) +
                 " accepted restrictions";
      return r;
    }
  }

  MembershipResult r;
  r.kind = WitnessKind::Rejected;
  r.detail = failure;
  return r;
}

MembershipResult Diffeology::is_plot(const Plot& candidate, const MembershipOptions& opt) const {
  if (candidate.target_dim != space_dim_)
    throw ShapeError("is_plot: candidate maps into dimension " +
                     std::to_string(candidate.target_dim) + ", expected " +
                     std::to_string(space_dim_));
  if (!candidate.eval) throw InputError("is_plot: candidate has no evaluator");

  switch (kind_) {
    case Kind::Generated:
      return membership_generated(candidate, opt);

    case Kind::Product: {
      const int d1 = split_;
      const int d2 = space_dim_ - split_;
      Plot first = candidate;
      first.target_dim = d1;
      auto eval = candidate.eval;
      first.eval = [eval, d1](const Vector& u) { return eval(u).head(d1).eval(); };
      Plot second = candidate;
      second.target_dim = d2;
      second.eval = [eval, d1, d2](const Vector& u) { return eval(u).segment(d1, d2).eval(); };
      MembershipResult ra = children_[0]->is_plot(first, opt);
      if (!ra.accepted) {
        ra.detail = "first projection rejected: " + ra.detail;
        return ra;
      }
      MembershipResult rb = children_[1]->is_plot(second, opt);
      if (!rb.accepted) {
        rb.detail = "second projection rejected: " + rb.detail;
        return rb;
      }
      MembershipResult r;
      r.accepted = true;
      r.kind = WitnessKind::Projected;
      r.residual = std::max(ra.residual, rb.residual);
      r.detail = "both projections accepted (" + ra.detail + "; " + rb.detail + ")";
      return r;
    }

    case Kind::Trace: {
      MembershipResult parent = children_[0]->is_plot(candidate, opt);
      if (!parent.accepted) return parent;
      const int per_axis = candidate.dim() <= 1 ? 33 : 9;
      for (const Vector& u : grid_points(candidate.domain, per_axis))
        if (!predicate_(candidate.eval(u))) {
          MembershipResult r;
          r.kind = WitnessKind::Rejected;
          r.detail = "image leaves the traced subset";
          return r;
        }
      parent.detail += "; image satisfies the trace predicate on samples";
      return parent;
    }

    case Kind::ProjectiveLimit: {
      MembershipResult last;
      for (std::size_t fi = 0; fi < children_.size(); ++fi) {
        Plot projected = candidate;
        projected.target_dim = children_[fi]->space_dim();
        auto eval = candidate.eval;
        auto proj = projections_[fi];
        projected.eval = [eval, proj](const Vector& u) { return proj(eval(u)); };
        MembershipResult r = children_[fi]->is_plot(projected, opt);
        if (!r.accepted) {
          r.detail = "factor " + std::to_string(fi) + " rejected: " + r.detail;
          return r;
        }
        last = r;
      }
      MembershipResult r;
      r.accepted = true;
      r.kind = WitnessKind::Projected;
      r.detail = "accepted in every factor of the projective family";
      r.residual = last.residual;
      return r;
    }
  }
  throw Error("is_plot: corrupt diffeology kind");
}

MembershipResult is_plot(const Plot& candidate, const Diffeology& diff, int probe_budget,
                         const MembershipOptions& opt) {
  if (probe_budget < 1) throw InputError("is_plot: probe_budget must be >= 1");
  MembershipOptions o = opt;
  o.probe_budget = probe_budget;
  return diff.is_plot(candidate, o);
}

// ---------------------------------------------------------------------------
// Frolicher structures

bool FroelicherStructure::contour_test(const Contour& c) const {
  for (const ScalarMap& f : generating_functions) {
    auto composed = [&](double t) { return f(c(t)); };
    if (!probe_scalar_map(composed, -1.0, 1.0, probe)) return false;
  }
  return true;
}

bool FroelicherStructure::function_test(const ScalarMap& h) const {
  for (const Contour& c : witness_contours) {
    auto composed = [&](double t) { return h(c(t)); };
    if (!probe_scalar_map(composed, -1.0, 1.0, probe)) return false;
  }
  return true;
}

bool FroelicherStructure::add_witness(const Contour& c) {
  if (!contour_test(c)) return false;
  witness_contours.push_back(c);
  return true;
}

FroelicherStructure froelicher_generate(std::vector<ScalarMap> generating, int space_dim,
                                        const Box& region, int witness_lines,
                                        std::uint64_t seed) {
  FroelicherStructure fs;
  fs.space_dim = space_dim;
  fs.generating_functions = std::move(generating);

  Rng rng(seed);
  int attempts = 0;
  while (static_cast<int>(fs.witness_contours.size()) < witness_lines && attempts < 8 * witness_lines) {
    ++attempts;
    Vector f(space_dim);
    for (int i = 0; i < space_dim; ++i) f[i] = 0.1 + 0.8 * rng.uniform();
    const Vector x0 = region.at_fraction(f);
    Vector dir = rng.normal_vector(space_dim);
    if (dir.norm() < 1e-12) continue;
    dir.normalize();
    // largest r with x0 +- r*dir inside the region
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < space_dim; ++i) {
      if (std::abs(dir[i]) < 1e-14) continue;
      r = std::min(r, (region.hi[i] - x0[i]) / std::abs(dir[i]));
      r = std::min(r, (x0[i] - region.lo[i]) / std::abs(dir[i]));
    }
    r *= 0.9;
    if (!(r > 0.0) || !std::isfinite(r)) continue;
    Vector x0c = x0;
    Vector dirc = dir;
    Contour line = [x0c, dirc, r](double t) { return (x0c + t * r * dirc).eval(); };
    fs.add_witness(line);  // kept only when every f o line probes smooth
  }
  return fs;
}

// ---------------------------------------------------------------------------
// JSON registry

Diffeology diffeology_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("space_dim") || !j["space_dim"].is_number_integer())
    throw ValidationError("space_dim", "missing or not an integer");
  const int d = j["space_dim"].get<int>();
  if (!j.contains("generators") || !j["generators"].is_array() || j["generators"].empty())
    throw ValidationError("generators", "missing or empty");

  std::vector<Plot> gens;
  for (std::size_t i = 0; i < j["generators"].size(); ++i) {
    const auto& g = j["generators"][i];
    const std::string path = "generators[" + std::to_string(i) + "]";
    if (!g.contains("domain") || !g["domain"].is_array())
      throw ValidationError(path + ".domain", "missing interval list");
    const int p = static_cast<int>(g["domain"].size());
    Vector lo(p), hi(p);
    for (int a = 0; a < p; ++a) {
      const auto& iv = g["domain"][static_cast<std::size_t>(a)];
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
        throw ValidationError(path + ".domain[" + std::to_string(a) + "]",
                              "expected [lo, hi]");
      lo[a] = iv[0].get<double>();
      hi[a] = iv[1].get<double>();
    }
    Box domain(lo, hi);
    const std::string label =
        g.contains("label") && g["label"].is_string() ? g["label"].get<std::string>()
                                                      : "generator" + std::to_string(i);

    if (g.contains("builtin")) {
      const std::string name = g["builtin"].get<std::string>();
      if (name == "identity") {
        if (p != d)
          throw ValidationError(path, "identity generator needs domain dimension " +
                                          std::to_string(d));
        gens.push_back(identity_plot(domain, label));
      } else if (name == "circle") {
        if (p != 1 || d != 2)
          throw ValidationError(path, "circle generator needs p = 1 into dimension 2");
        Plot c;
        c.domain = domain;
        c.target_dim = 2;
        c.eval = [](const Vector& u) {
          Vector y(2);
          y[0] = std::cos(2.0 * kPi * u[0]);
          y[1] = std::sin(2.0 * kPi * u[0]);
          return y;
        };
        c.label = label;
        gens.push_back(std::move(c));
      } else {
        throw ValidationError(path + ".builtin", "unknown evaluator '" + name + "'");
      }
      continue;
    }

    if (!g.contains("components") || !g["components"].is_array() ||
        static_cast<int>(g["components"].size()) != d)
      throw ValidationError(path + ".components",
                            "expected " + std::to_string(d) + " expressions");
    std::vector<Expr> comps;
    for (int k = 0; k < d; ++k) {
      const auto& e = g["components"][static_cast<std::size_t>(k)];
      if (!e.is_string())
        throw ValidationError(path + ".components[" + std::to_string(k) + "]",
                              "expected an expression string");
      try {
        comps.push_back(Expr::parse(e.get<std::string>()));
      } catch (const ExprError& ex) {
        throw ValidationError(path + ".components[" + std::to_string(k) + "]", ex.what());
      }
    }
    Plot e;
    e.domain = domain;
    e.target_dim = d;
    e.label = label;
    const int pp = p;
    e.eval = [comps, pp, d](const Vector& u) {
      Env env;
      for (int a = 0; a < pp; ++a) env.set("u" + std::to_string(a + 1), u[a]);
      if (pp >= 1) env.set("t", u[0]);
      Vector y(d);
      for (int k = 0; k < d; ++k) y[k] = comps[static_cast<std::size_t>(k)].eval(env);
      return y;
    };
    gens.push_back(std::move(e));
  }

  Diffeology diff = Diffeology::generated(d, std::move(gens));
  // evaluability of every generator on its sample grid
  for (const Plot& g : diff.generators())
    for (const Vector& u : grid_points(g.domain, g.dim() <= 1 ? 17 : 5))
      if (!g.eval(u).allFinite())
        throw ValidationError("generators", "generator '" + g.label +
                                                "' not finite on its sample grid");
  return diff;
}

}  // namespace holab
