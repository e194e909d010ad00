#include "holab/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace holab {

Loop Scenario::random_loop(Rng& rng, const std::string& id) const {
  SmoothPath p = fourier_loop(random_policy.center, random_policy.harmonics, rng,
                              connection.chart.domain, random_policy.radius);
  return make_loop(std::move(p), connection.chart, id);
}

SmoothPath Scenario::random_path(Rng& rng) const {
  return fourier_path(random_policy.center, random_policy.harmonics, rng,
                      connection.chart.domain, random_policy.radius);
}

const Loop* Scenario::find_loop(const std::string& id) const {
  for (const Loop& l : loops)
    if (l.id == id) return &l;
  return nullptr;
}

namespace {

AlgebraBasis so2_basis() {
  AlgebraBasis b;
  b.name = "so2";
  b.matrix_size = 2;
  b.elements = {so2_J()};
  b.compute_structure_constants();
  return b;
}

AlgebraBasis so3_xyz_basis() {
  AlgebraBasis b;
  b.name = "so3";
  b.matrix_size = 3;
  b.elements = {so3_Lx(), so3_Ly(), so3_Lz()};
  b.compute_structure_constants();
  return b;
}

std::vector<ConnectionTerm> parse_terms(const std::vector<std::tuple<std::string, int, int>>& raw) {
  std::vector<ConnectionTerm> terms;
  for (const auto& [coeff, dx, basis] : raw)
    terms.push_back(ConnectionTerm{Expr::parse(coeff), dx, basis});
  return terms;
}

Loop winding_loop(const BaseChart& chart, int n1, int n2) {
  Vector from = Vector::Zero(2);
  Vector to(2);
  to << n1, n2;
  return make_loop(line_path(from, to), chart,
                   "winding-" + std::to_string(n1) + "-" + std::to_string(n2));
}

// winding loop deformed by a closed bump that preserves the winding class
Loop deformed_winding_loop(const BaseChart& chart, int n1, int n2, double s, Rng& rng) {
  Vector to(2);
  to << n1, n2;
  const double a1 = 0.05 + 0.15 * rng.uniform();
  const double a2 = 0.05 + 0.15 * rng.uniform();
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  auto eval = [to, s, a1, a2, phase](double t) {
    const double u = flat_step(t);
    Vector x = u * to;
    x[0] += s * a1 * std::sin(2.0 * kPi * u + phase) - s * a1 * std::sin(phase);
    x[1] += s * a2 * std::sin(4.0 * kPi * u + phase) - s * a2 * std::sin(phase);
    return x;
  };
  SmoothPath p = make_path(2, eval);
  p.stationary_ends = true;
  return make_loop(std::move(p), chart,
                   "winding-" + std::to_string(n1) + "-" + std::to_string(n2) + "-s" +
                       format_double(s));
}

}  // namespace

Loop sphere_latitude_loop(const BaseChart& chart, double phi0) {
  auto eval = [phi0](double t) {
    const double u = flat_step(t);
    Vector x(2);
    x[0] = phi0;
    x[1] = -kPi + 2.0 * kPi * u;
    return x;
  };
  auto deriv = [](double t) {
    Vector v(2);
    v[0] = 0.0;
    v[1] = 2.0 * kPi * flat_step_deriv(t);
    return v;
  };
  SmoothPath p = make_path(2, eval, deriv);
  p.stationary_ends = true;
  return make_loop(std::move(p), chart, "latitude-" + format_double(phi0));
}

std::vector<std::string> builtin_scenario_names() {
  return {"flat-plane", "flat-torus", "magnetic-u1", "sphere-lc", "so3-generic",
          "so3-reducible"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;

  if (name == "flat-plane") {
    s.group = MatrixGroup::special_orthogonal(2);
    s.algebra = so2_basis();
    BaseChart chart{2, Box::cube(2, -2.0, 2.0), "plane", {}, {}};
    s.connection = connection_from_terms(chart, s.group, s.algebra, {});
    s.properties.flat = true;
    s.properties.abelian = true;
    s.random_policy = {Vector::Zero(2), 0.8, 3};
    // a circle and a figure-ish loop around the origin
    s.loops.push_back(make_loop(
        path_from_expressions({Expr::parse("0.7*cos(2*pi*t)-0.7"), Expr::parse("0.7*sin(2*pi*t)")}),
        s.connection.chart, "circle"));
    LoopHomotopy shrink;
    shrink.name = "shrink-circle";
    BaseChart chart_copy = s.connection.chart;
    shrink.at = [chart_copy](double hs) {
      const double r = 0.7 - 0.5 * hs;
      Env env;
      env.set("s", r);
      return make_loop(path_from_expressions({Expr::parse("s*cos(2*pi*t)-s"),
                                              Expr::parse("s*sin(2*pi*t)")},
                                             env),
                       chart_copy, "circle-r" + format_double(r));
    };
    s.homotopies.push_back(std::move(shrink));
    s.notes = "A = 0 on (-2,2)^2, group SO(2); every holonomy is the identity.";
    return s;
  }

  if (name == "flat-torus") {
    s.group = MatrixGroup::special_orthogonal(2);
    s.algebra = so2_basis();
    BaseChart chart{2, Box::cube(2, -2.5, 2.5), "torus-cover", {1.0, 1.0}, {}};
    // constant form: holonomy depends only on the winding class
    s.connection = connection_from_terms(
        chart, s.group, s.algebra,
        parse_terms({{"1.8849555921538759", 0, 0}, {"3.4557519189487724", 1, 0}}));
    s.properties.flat = true;
    s.properties.abelian = true;
    s.random_policy = {Vector::Zero(2), 0.45, 3};
    s.loops.push_back(winding_loop(chart, 1, 0));
    s.loops.push_back(winding_loop(chart, 0, 1));
    s.loops.push_back(winding_loop(chart, 1, 1));
    for (const auto& [n1, n2] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 1}}) {
      LoopHomotopy h;
      h.name = "deform-winding-" + std::to_string(n1) + "-" + std::to_string(n2);
      const int a = n1, b = n2;
      h.at = [chart, a, b](double hs) {
        Rng rng(1234);
        return deformed_winding_loop(chart, a, b, hs, rng);
      };
      s.homotopies.push_back(std::move(h));
    }
    s.notes =
        "Flat torus R^2/Z^2 with the constant form A = 2*pi*(0.3 dx + 0.55 dy) (x) J; "
        "holonomy angle of a (n1,n2) winding loop is -2*pi*(0.3 n1 + 0.55 n2).";
    return s;
  }

  if (name == "magnetic-u1") {
    s.group = MatrixGroup::special_orthogonal(2);
    s.algebra = so2_basis();
    BaseChart chart{2, Box::cube(2, -2.0, 2.0), "plane", {}, {}};
    s.connection = connection_from_terms(chart, s.group, s.algebra, parse_terms({{"x", 1, 0}}));
    s.properties.abelian = true;
    s.random_policy = {Vector::Zero(2), 0.8, 3};
    // unit square from the origin, counter-clockwise
    {
      Vector p00 = Vector::Zero(2), p10(2), p11(2), p01(2);
      p10 << 1, 0;
      p11 << 1, 1;
      p01 << 0, 1;
      SmoothPath square = concat(
          line_path(p01, p00),
          concat(line_path(p11, p01), concat(line_path(p10, p11), line_path(p00, p10))));
      s.loops.push_back(make_loop(square, chart, "unit-square"));
    }
    s.loops.push_back(make_loop(
        path_from_expressions({Expr::parse("0.8*cos(2*pi*t)-0.8"), Expr::parse("0.8*sin(2*pi*t)")}),
        chart, "circle"));
    s.notes =
        "A = x dy (x) J on (-2,2)^2, group SO(2); curvature F = J dx^dy and the "
        "holonomy of a loop is exp(-signed_area * J) (abelian Stokes).";
    return s;
  }

  if (name == "sphere-lc") {
    s.group = MatrixGroup::special_orthogonal(2);
    s.algebra = so2_basis();
    BaseChart chart{2, Box(Vector{{0.05, -3.3}}, Vector{{3.09, 3.3}}), "sphere-polar",
                    {0.0, 2.0 * kPi}, {}};
    chart.embedding = [](const Vector& x) {
      Vector e(3);
      e << std::sin(x[0]) * std::cos(x[1]), std::sin(x[0]) * std::sin(x[1]), std::cos(x[0]);
      return e;
    };
    // spin connection of the round metric in the orthonormal polar frame
    s.connection =
        connection_from_terms(chart, s.group, s.algebra, parse_terms({{"-cos(x)", 1, 0}}));
    s.random_policy = {Vector{{kPi / 2.0, 0.0}}, 0.45, 3};
    for (double phi0 : {kPi / 6.0, kPi / 4.0, kPi / 3.0, kPi / 2.0})
      s.loops.push_back(sphere_latitude_loop(chart, phi0));
    LoopHomotopy sweep;
    sweep.name = "latitude-sweep";
    sweep.at = [chart](double hs) {
      return sphere_latitude_loop(chart, kPi / 6.0 + hs * kPi / 3.0);
    };
    s.homotopies.push_back(std::move(sweep));
    s.notes =
        "Levi-Civita connection of the unit sphere in the (colatitude, longitude) chart, "
        "A = -cos(phi) dlambda (x) J; the latitude loop at phi0 has holonomy angle "
        "2*pi*(1-cos(phi0)) (mod 2*pi).";
    return s;
  }

  if (name == "so3-generic") {
    s.group = MatrixGroup::special_orthogonal(3);
    s.algebra = so3_xyz_basis();
    BaseChart chart{2, Box::cube(2, -1.5, 1.5), "plane", {}, {}};
    // A = x dy (x) L_z + y dx (x) L_x: curvature L_z - L_x - x y L_y
    s.connection = connection_from_terms(chart, s.group, s.algebra,
                                         parse_terms({{"x", 1, 2}, {"y", 0, 0}}));
    s.random_policy = {Vector{{0.2, 0.1}}, 0.6, 3};
    s.loops.push_back(make_loop(
        path_from_expressions({Expr::parse("0.2 + 0.5*cos(2*pi*t) - 0.5"),
                               Expr::parse("0.1 + 0.5*sin(2*pi*t)")}),
        chart, "circle"));
    s.notes =
        "Non-abelian SO(3) connection A = x dy (x) L_z + y dx (x) L_x; the curvature "
        "elements bracket-generate all of so(3).";
    return s;
  }

  if (name == "so3-reducible") {
    s.group = MatrixGroup::special_orthogonal(3);
    s.algebra = so3_xyz_basis();
    BaseChart chart{2, Box::cube(2, -2.0, 2.0), "plane", {}, {}};
    s.connection =
        connection_from_terms(chart, s.group, s.algebra, parse_terms({{"x", 1, 2}}));
    s.properties.abelian = true;
    s.properties.reducible_to = "so(2) block in so(3) spanned by L_z (axes 0,1)";
    s.properties.reducible_basis = {so3_Lz()};
    s.random_policy = {Vector::Zero(2), 0.8, 3};
    s.loops.push_back(make_loop(
        path_from_expressions({Expr::parse("0.8*cos(2*pi*t)-0.8"), Expr::parse("0.8*sin(2*pi*t)")}),
        chart, "circle"));
    s.notes =
        "A = x dy (x) L_z inside so(3): every holonomy stays in the embedded SO(2) "
        "and the reduced holonomy algebra is the L_z line.";
    return s;
  }

  throw ValidationError("scenario", "unknown built-in scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON loading

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                    const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + key, "missing field");
  return j[key];
}

double number_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text, const std::string& source_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(source_name, std::string("invalid JSON: ") + e.what());
  }

  const int version = require_field(j, "schema_version", "").get<int>();
  if (version != 1)
    throw ValidationError("schema_version", "unsupported version " + std::to_string(version));

  Scenario s;
  s.name = require_field(j, "name", "").get<std::string>();

  // group
  const auto& jg = require_field(j, "group", "");
  const std::string family = require_field(jg, "family", "group.").get<std::string>();
  const int gsize = require_field(jg, "size", "group.").get<int>();
  if (family == "SO")
    s.group = MatrixGroup::special_orthogonal(gsize);
  else if (family == "GL")
    s.group = MatrixGroup::general_linear(gsize);
  else
    throw ValidationError("group.family", "expected \"SO\" or \"GL\"");

  // algebra: explicit basis, or the default for the group
  if (j.contains("algebra")) {
    s.algebra = AlgebraBasis::from_json_text(j["algebra"].dump());
    if (s.algebra.matrix_size != s.group.size)
      throw ValidationError("algebra.matrix_size", "does not match group size");
  } else if (gsize == 2) {
    s.algebra = so2_basis();
  } else if (gsize == 3) {
    s.algebra = so3_xyz_basis();
  } else {
    throw ValidationError("algebra", "required for groups of size > 3");
  }

  // base chart
  const auto& jb = require_field(j, "base", "");
  const auto& jbox = require_field(jb, "box", "base.");
  if (!jbox.is_array() || jbox.empty()) throw ValidationError("base.box", "expected interval list");
  const int dim = static_cast<int>(jbox.size());
  Vector lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    const auto& iv = jbox[static_cast<std::size_t>(i)];
    const std::string path = "base.box[" + std::to_string(i) + "]";
    if (!iv.is_array() || iv.size() != 2) throw ValidationError(path, "expected [lo, hi]");
    lo[i] = number_at(iv[0], path + "[0]");
    hi[i] = number_at(iv[1], path + "[1]");
    if (!(lo[i] < hi[i])) throw ValidationError(path, "requires lo < hi");
  }
  BaseChart chart;
  chart.dim = dim;
  chart.domain = Box(lo, hi);
  chart.name = jb.contains("name") ? jb["name"].get<std::string>() : s.name;
  if (jb.contains("periods")) {
    const auto& jp = jb["periods"];
    if (!jp.is_array() || static_cast<int>(jp.size()) != dim)
      throw ValidationError("base.periods", "expected one entry per axis");
    for (int i = 0; i < dim; ++i)
      chart.periods.push_back(number_at(jp[static_cast<std::size_t>(i)],
                                        "base.periods[" + std::to_string(i) + "]"));
  }

  // connection terms
  std::vector<ConnectionTerm> terms;
  const auto& jc = require_field(j, "connection", "");
  const auto& jterms = require_field(jc, "terms", "connection.");
  if (!jterms.is_array()) throw ValidationError("connection.terms", "expected an array");
  for (std::size_t k = 0; k < jterms.size(); ++k) {
    const auto& jt = jterms[k];
    const std::string path = "connection.terms[" + std::to_string(k) + "]";
    ConnectionTerm term;
    try {
      term.coeff = Expr::parse(require_field(jt, "coeff", path + ".").get<std::string>());
    } catch (const ExprError& e) {
      throw ValidationError(path + ".coeff", e.what());
    }
    term.dx = require_field(jt, "dx", path + ".").get<int>();
    term.basis = require_field(jt, "basis", path + ".").get<int>();
    if (term.dx < 0 || term.dx >= dim) throw ValidationError(path + ".dx", "axis out of range");
    if (term.basis < 0 || term.basis >= s.algebra.rank())
      throw ValidationError(path + ".basis", "basis index out of range");
    terms.push_back(std::move(term));
  }
  s.connection = connection_from_terms(chart, s.group, s.algebra, terms);

  // evaluate coefficients on the chart sample grid
  for (int gx = 0; gx <= 4; ++gx)
    for (int gy = 0; gy <= 4 && dim >= 2; ++gy) {
      Vector f(dim);
      f.setConstant(0.5);
      f[0] = gx / 4.0;
      if (dim >= 2) f[1] = gy / 4.0;
      const Vector x = chart.domain.at_fraction(f, 1e-3);
      for (int i = 0; i < dim; ++i) {
        Vector ei = Vector::Zero(dim);
        ei[i] = 1.0;
        if (!s.connection.local_form(x, ei).allFinite())
          throw ValidationError("connection.terms",
                                "coefficients not finite on the chart sample grid");
      }
    }

  // loops
  if (j.contains("loops")) {
    if (!j["loops"].is_array()) throw ValidationError("loops", "expected an array");
    for (std::size_t k = 0; k < j["loops"].size(); ++k) {
      const auto& jl = j["loops"][k];
      const std::string path = "loops[" + std::to_string(k) + "]";
      const auto& jcomp = require_field(jl, "components", path + ".");
      if (!jcomp.is_array() || static_cast<int>(jcomp.size()) != dim)
        throw ValidationError(path + ".components",
                              "expected " + std::to_string(dim) + " expressions");
      std::vector<Expr> comps;
      for (int i = 0; i < dim; ++i) {
        try {
          comps.push_back(Expr::parse(jcomp[static_cast<std::size_t>(i)].get<std::string>()));
        } catch (const ExprError& e) {
          throw ValidationError(path + ".components[" + std::to_string(i) + "]", e.what());
        }
      }
      const std::string id =
          jl.contains("name") ? jl["name"].get<std::string>() : "loop" + std::to_string(k);
      try {
        s.loops.push_back(make_loop(path_from_expressions(comps), chart, id));
      } catch (const Error& e) {
        throw ValidationError(path, e.what());
      }
    }
  }

  // homotopies: components in t and s
  if (j.contains("homotopies")) {
    if (!j["homotopies"].is_array()) throw ValidationError("homotopies", "expected an array");
    for (std::size_t k = 0; k < j["homotopies"].size(); ++k) {
      const auto& jh = j["homotopies"][k];
      const std::string path = "homotopies[" + std::to_string(k) + "]";
      const auto& jcomp = require_field(jh, "components", path + ".");
      if (!jcomp.is_array() || static_cast<int>(jcomp.size()) != dim)
        throw ValidationError(path + ".components",
                              "expected " + std::to_string(dim) + " expressions");
      std::vector<Expr> comps;
      for (int i = 0; i < dim; ++i) {
        try {
          comps.push_back(Expr::parse(jcomp[static_cast<std::size_t>(i)].get<std::string>()));
        } catch (const ExprError& e) {
          throw ValidationError(path + ".components[" + std::to_string(i) + "]", e.what());
        }
      }
      LoopHomotopy h;
      h.name = jh.contains("name") ? jh["name"].get<std::string>() : "homotopy" + std::to_string(k);
      const std::string hname = h.name;
      h.at = [comps, chart, hname](double hs) {
        Env env;
        env.set("s", hs);
        return make_loop(path_from_expressions(comps, env), chart,
                         hname + "-s" + format_double(hs));
      };
      // validate at the endpoints now so errors surface at load time
      try {
        h.at(0.0);
        h.at(1.0);
      } catch (const Error& e) {
        throw ValidationError(path, e.what());
      }
      s.homotopies.push_back(std::move(h));
    }
  }

  // properties and random-loop policy
  if (j.contains("properties")) {
    const auto& jp = j["properties"];
    if (jp.contains("flat")) s.properties.flat = jp["flat"].get<bool>();
    if (jp.contains("abelian")) s.properties.abelian = jp["abelian"].get<bool>();
    if (jp.contains("reducible_basis")) {
      const auto& jr = jp["reducible_basis"];
      if (!jr.is_array()) throw ValidationError("properties.reducible_basis", "expected an array");
      const int n = s.group.size;
      for (std::size_t k = 0; k < jr.size(); ++k) {
        const auto& row = jr[k];
        if (!row.is_array() || static_cast<int>(row.size()) != n * n)
          throw ValidationError("properties.reducible_basis[" + std::to_string(k) + "]",
                                "expected " + std::to_string(n * n) + " row-major entries");
        Matrix m(n, n);
        for (int e = 0; e < n * n; ++e)
          m(e / n, e % n) = number_at(row[static_cast<std::size_t>(e)],
                                      "properties.reducible_basis[" + std::to_string(k) + "]");
        s.properties.reducible_basis.push_back(std::move(m));
      }
      s.properties.reducible_to = jp.contains("reducible_to")
                                      ? jp["reducible_to"].get<std::string>()
                                      : "user-declared subalgebra";
    }
  }

  s.random_policy.center = chart.domain.center();
  s.random_policy.radius = 0.25 * chart.domain.min_width();
  if (j.contains("random_loops")) {
    const auto& jr = j["random_loops"];
    if (jr.contains("center")) {
      const auto& jcenter = jr["center"];
      if (!jcenter.is_array() || static_cast<int>(jcenter.size()) != dim)
        throw ValidationError("random_loops.center", "expected one entry per axis");
      for (int i = 0; i < dim; ++i)
        s.random_policy.center[i] =
            number_at(jcenter[static_cast<std::size_t>(i)], "random_loops.center");
    }
    if (jr.contains("radius")) s.random_policy.radius = number_at(jr["radius"], "random_loops.radius");
    if (jr.contains("harmonics")) s.random_policy.harmonics = jr["harmonics"].get<int>();
  }

  if (j.contains("notes")) s.notes = j["notes"].get<std::string>();
  return s;
}

Scenario load_scenario(const std::string& name_or_path) {
  for (const std::string& b : builtin_scenario_names())
    if (b == name_or_path) return builtin_scenario(name_or_path);

  std::ifstream in(name_or_path);
  if (!in)
    throw ValidationError("scenario",
                          "'" + name_or_path + "' is neither a built-in scenario nor a readable file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str(), name_or_path);
}

}  // namespace holab
