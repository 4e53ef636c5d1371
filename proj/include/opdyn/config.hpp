#pragma once

// JSON analysis configs. Complex numbers are [re, im] pairs (bare numbers are
// read as real). Every schema failure names the offending location, e.g.
// "analyses[0].balls[0].radius".

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "opdyn/operator_sets.hpp"
#include "opdyn/recurrence.hpp"
#include "opdyn/reggroups.hpp"

namespace opdyn {

using Json = nlohmann::json;

struct Tolerances {
  double commutation = 1e-10;
  double inverse = 1e-10;
  double unimodular = 1e-12;
  double slack = 1e-9;
  double certify_margin = 0.0;  // <= 0: 1e-6 * radius
};

namespace analysis {
struct Residual {
  Vector x;
  NormKind norm;
};
struct EpsRecurrent {
  std::vector<Vector> xs;  // grid vectors, zero vector already removed
  std::size_t skipped_zero;
  double eps;
};
struct Gdelta {
  Vector x;
  std::size_t s_max;
};
struct CertifySet {
  std::vector<Ball> balls;
  double margin;
  bool record_values;
};
struct Construct {
  Ball ball;
  std::size_t steps;
  double theta;
};
struct OrbitRatio {
  Vector x;
  std::vector<Vector> probes;
  double delta;
};
struct GroupScan {
  std::vector<Ball> balls;
  double margin;
  std::size_t axioms_samples;
};
struct TransferCheck {
  Vector x;
  double eps;
  Sequence lambda;
  std::size_t enlargement;
  std::size_t sample;
};
}  // namespace analysis

struct AnalysisSpec {
  using Params = std::variant<analysis::Residual, analysis::EpsRecurrent, analysis::Gdelta, analysis::CertifySet,
                              analysis::Construct, analysis::OrbitRatio, analysis::GroupScan, analysis::TransferCheck>;
  std::string kind;
  std::string path;
  std::size_t budget;  // per-analysis override or the config budget
  Params params;
};

/// The group and grid behind a creg_grid set, kept for group-level analyses.
struct GroupContext {
  CRegGroup group;
  ComplexGrid grid;
};

struct AnalysisConfig {
  Json document;
  std::size_t dim = 0;
  NormKind norm = NormKind::L2;
  std::optional<TruncationWindow> window;
  OperatorSet set;
  std::optional<GroupContext> group;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  Tolerances tolerances;
  std::vector<AnalysisSpec> analyses;
};

namespace config_detail {

/// Cursor into the document that remembers its path.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node operator[](const std::string& key) const {
    expect_object();
    if (!j_->contains(key)) throw SchemaError(child_path(key), "required field missing");
    return Node((*j_)[key], child_path(key));
  }

  std::optional<Node> optional(const std::string& key) const {
    expect_object();
    if (!j_->contains(key) || (*j_)[key].is_null()) return std::nullopt;
    return Node((*j_)[key], child_path(key));
  }

  std::size_t size() const {
    if (!j_->is_array()) throw SchemaError(path_, "expected an array");
    return j_->size();
  }

  Node at(std::size_t i) const {
    if (!j_->is_array()) throw SchemaError(path_, "expected an array");
    return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  void expect_object() const {
    if (!j_->is_object()) throw SchemaError(path_, "expected an object");
  }

  double number() const {
    if (!j_->is_number()) throw SchemaError(path_, "expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) throw SchemaError(path_, "number must be finite");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) throw SchemaError(path_, "must be > 0");
    return v;
  }

  std::uint64_t unsigned_int() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0))
      throw SchemaError(path_, "expected a non-negative integer");
    return j_->get<std::uint64_t>();
  }

  std::size_t count() const {
    const auto v = unsigned_int();
    if (v == 0) throw SchemaError(path_, "must be >= 1");
    return static_cast<std::size_t>(v);
  }

  bool boolean() const {
    if (!j_->is_boolean()) throw SchemaError(path_, "expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) throw SchemaError(path_, "expected a string");
    return j_->get<std::string>();
  }

  Complex complex() const {
    if (j_->is_number()) return {number(), 0.0};
    if (j_->is_array() && j_->size() == 2) return {at(0).number(), at(1).number()};
    throw SchemaError(path_, "expected a complex number [re, im]");
  }

 private:
  const Json* j_;
  std::string path_;
};

inline std::vector<Complex> complex_list(const Node& n) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).complex());
  return out;
}

inline std::string kind_of(const Node& n) { return n["kind"].string(); }

[[noreturn]] inline void unknown_kind(const Node& n, const std::string& kind, const std::string& allowed) {
  throw SchemaError(n.child_path("kind"), "unknown kind '" + kind + "' (expected one of " + allowed + ")",
                    ErrorKind::UnknownKind);
}

/// Re-raises library errors from builders with the config location attached.
template <class F>
auto at_path(const Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto cut = msg.find(": ");
    if (cut != std::string::npos) msg.erase(0, cut + 2);
    throw SchemaError(n.path(), msg, e.kind());
  }
}

inline Vector vector(const Node& n, std::size_t dim) {
  const auto values = complex_list(n);
  if (values.size() != dim)
    throw SchemaError(n.path(), "expected " + std::to_string(dim) + " entries, got " + std::to_string(values.size()),
                      ErrorKind::DimensionMismatch);
  CVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return at_path(n, [&] { return Vector(v); });
}

inline Ball ball(const Node& n, std::size_t dim) {
  Vector c = vector(n["center"], dim);
  const Node r = n["radius"];
  const double rad = r.number();
  if (rad < 0.0) throw SchemaError(r.path(), "radius must be >= 0");
  return Ball(std::move(c), rad);
}

inline std::size_t part_dim(const Node& n) { return n["dim"].count(); }

inline Operator parse_operator(const Node& n, std::size_t dim) {
  const std::string kind = kind_of(n);
  return at_path(n, [&]() -> Operator {
    if (kind == "scalar") return scalar(dim, n["a"].complex());
    if (kind == "identity") return identity(dim);
    if (kind == "diagonal") {
      const Node e = n["entries"];
      auto d = complex_list(e);
      if (d.size() != dim) throw SchemaError(e.path(), "expected " + std::to_string(dim) + " entries", ErrorKind::DimensionMismatch);
      return diagonal(Eigen::Map<const CVector>(d.data(), static_cast<Eigen::Index>(d.size())));
    }
    if (kind == "backward_shift") return backward_shift(dim, n.optional("weight") ? n["weight"].complex() : Complex(1.0));
    if (kind == "forward_shift") return forward_shift(dim, n.optional("weight") ? n["weight"].complex() : Complex(1.0));
    if (kind == "rank_one_fix") return rank_one_fix(dim);
    if (kind == "dense") {
      const Node rows = n["rows"];
      if (rows.size() != dim) throw SchemaError(rows.path(), "expected " + std::to_string(dim) + " rows", ErrorKind::DimensionMismatch);
      CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i) {
        const Node row = rows.at(i);
        const auto vals = complex_list(row);
        if (vals.size() != dim) throw SchemaError(row.path(), "expected " + std::to_string(dim) + " entries", ErrorKind::DimensionMismatch);
        for (std::size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[j];
      }
      return dense(std::move(m));
    }
    if (kind == "composition") return compose(parse_operator(n["left"], dim), parse_operator(n["right"], dim));
    if (kind == "power") return power(parse_operator(n["base"], dim), n["exponent"].unsigned_int());
    if (kind == "direct_sum") {
      const Node parts = n["parts"];
      std::vector<Operator> ops;
      std::size_t total = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Node p = parts.at(i);
        const std::size_t d = part_dim(p);
        ops.push_back(parse_operator(p, d));
        total += d;
      }
      if (total != dim)
        throw SchemaError(parts.path(), "part dimensions sum to " + std::to_string(total) + ", expected " + std::to_string(dim),
                          ErrorKind::DimensionMismatch);
      return direct_sum(std::move(ops));
    }
    unknown_kind(n, kind,
                 "scalar, identity, diagonal, backward_shift, forward_shift, rank_one_fix, dense, composition, power, "
                 "direct_sum");
  });
}

inline Sequence parse_sequence(const Node& n) {
  const std::string kind = kind_of(n);
  const auto params = n.optional("params");
  if (kind == "one_plus_inverse") {
    double scale = 1.0;
    if (params && params->has("scale")) scale = (*params)["scale"].number();
    return Sequence::one_plus_inverse(scale);
  }
  if (kind == "unimodular_phase") {
    if (!params) throw SchemaError(n.child_path("params"), "required field missing");
    return Sequence::phase((*params)["theta"].number());
  }
  if (kind == "explicit_list") {
    if (!params) throw SchemaError(n.child_path("params"), "required field missing");
    auto v = complex_list((*params)["values"]);
    if (v.empty()) throw SchemaError(n.child_path("params.values"), "list must be nonempty");
    return Sequence::list(std::move(v));
  }
  unknown_kind(n, kind, "one_plus_inverse, unimodular_phase, explicit_list");
}

inline ComplexGrid parse_grid(const Node& n) {
  std::vector<Complex> pts;
  if (auto p = n.optional("points")) pts = complex_list(*p);
  std::optional<GridRect> rect;
  if (auto r = n.optional("rect"))
    rect = GridRect{(*r)["re_lo"].number(), (*r)["re_hi"].number(), (*r)["im_lo"].number(), (*r)["im_hi"].number(),
                    (*r)["step"].positive()};
  return at_path(n, [&] { return make_grid(pts, rect); });
}

inline CRegGroup parse_group(const Node& n, std::size_t dim, const Tolerances& tol) {
  Operator a = parse_operator(n["generator"], dim);
  Operator c = parse_operator(n["regularizer"], dim);
  GroupTolerances gt;
  gt.commutation = tol.commutation;
  return at_path(n, [&] { return build_group(a, c, gt); });
}

inline OperatorSet parse_set(const Node& n, std::size_t dim, const Tolerances& tol, std::optional<GroupContext>* group) {
  const std::string kind = kind_of(n);
  SetTolerances st;
  st.unimodular = tol.unimodular;
  st.inverse = tol.inverse;
  if (kind == "finite_list") {
    const Node ops = n["operators"];
    std::vector<Operator> v;
    for (std::size_t i = 0; i < ops.size(); ++i) v.push_back(parse_operator(ops.at(i), dim));
    return at_path(ops, [&] { return finite_list(std::move(v)); });
  }
  if (kind == "powers") {
    Operator base = parse_operator(n["operator"], dim);
    const std::uint64_t start = n.optional("start_exponent") ? n["start_exponent"].unsigned_int() : 1;
    return powers(std::move(base), start);
  }
  if (kind == "scalar_family") return scalar_family(dim, parse_sequence(n["sequence"]));
  if (kind == "unimodular_scaled") {
    OperatorSet base = parse_set(n["base"], dim, tol, nullptr);
    Sequence lambda = parse_sequence(n["sequence"]);
    return at_path(n["sequence"], [&] { return unimodular_scaled(std::move(base), std::move(lambda), st); });
  }
  if (kind == "direct_sum") {
    const Node parts = n["parts"];
    DirectSumMode mode = DirectSumMode::Diagonal;
    if (auto m = n.optional("mode")) {
      const auto s = m->string();
      if (s == "product") mode = DirectSumMode::Product;
      else if (s != "diagonal") throw SchemaError(m->path(), "mode must be 'diagonal' or 'product'");
    }
    std::vector<OperatorSet> v;
    std::size_t total = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Node p = parts.at(i);
      const std::size_t d = part_dim(p);
      v.push_back(parse_set(p, d, tol, nullptr));
      total += d;
    }
    if (total != dim)
      throw SchemaError(parts.path(), "part dimensions sum to " + std::to_string(total) + ", expected " + std::to_string(dim),
                        ErrorKind::DimensionMismatch);
    return at_path(n, [&] { return direct_sum_set(std::move(v), mode); });
  }
  if (kind == "conjugate") {
    OperatorSet base = parse_set(n["base"], dim, tol, nullptr);
    Operator phi = parse_operator(n["phi"], dim);
    Operator phi_inv = parse_operator(n["phi_inv"], dim);
    return at_path(n, [&] { return conjugate_set(std::move(base), std::move(phi), std::move(phi_inv), st); });
  }
  if (kind == "creg_grid") {
    CRegGroup g = parse_group(n["group"], dim, tol);
    ComplexGrid grid = parse_grid(n["grid"]);
    if (group) *group = GroupContext{g, grid};
    return creg_grid(std::move(g), grid.points);
  }
  unknown_kind(n, kind, "finite_list, powers, scalar_family, unimodular_scaled, direct_sum, conjugate, creg_grid");
}

/// Balls given explicitly ("balls") or as a lattice of equal balls over a
/// region ("ball_grid": {center, radius, per_axis, ball_radius}).
inline std::vector<Ball> parse_balls(const Node& a, std::size_t dim) {
  std::vector<Ball> out;
  if (auto bs = a.optional("balls"))
    for (std::size_t i = 0; i < bs->size(); ++i) out.push_back(ball(bs->at(i), dim));
  if (auto g = a.optional("ball_grid")) {
    const Ball region = ball(*g, dim);
    const std::size_t per_axis = (*g)["per_axis"].count();
    const double br = (*g)["ball_radius"].positive();
    auto pts = at_path(*g, [&] { return grid_points(region, per_axis); });
    for (auto& p : pts) out.emplace_back(std::move(p), br);
  }
  if (out.empty()) throw SchemaError(a.child_path("balls"), "required field missing");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i].radius > 0.0)) throw SchemaError(a.child_path("balls[" + std::to_string(i) + "].radius"), "must be > 0");
  return out;
}

inline AnalysisSpec parse_analysis(const Node& a, const AnalysisConfig& cfg) {
  const std::string kind = kind_of(a);
  const std::size_t budget = a.optional("budget") ? a["budget"].count() : cfg.budget;
  std::optional<AnalysisSpec::Params> params;
  const std::size_t dim = cfg.dim;
  const double margin = a.optional("margin") ? a["margin"].positive() : cfg.tolerances.certify_margin;

  if (kind == "residual") {
    NormKind nk = cfg.norm;
    params = analysis::Residual{vector(a["x"], dim), nk};
  } else if (kind == "eps_recurrent") {
    analysis::EpsRecurrent e{{}, 0, a["eps"].positive()};
    std::vector<Vector> raw;
    if (auto x = a.optional("x")) raw.push_back(vector(*x, dim));
    if (auto g = a.optional("grid")) {
      const Ball region = ball(*g, dim);
      const std::size_t per_axis = (*g)["per_axis"].count();
      auto pts = at_path(*g, [&] { return grid_points(region, per_axis); });
      raw.insert(raw.end(), pts.begin(), pts.end());
    }
    if (raw.empty()) throw SchemaError(a.child_path("x"), "required field missing (or give 'grid')");
    for (auto& v : raw) {
      if (v.is_zero()) ++e.skipped_zero;
      else e.xs.push_back(std::move(v));
    }
    params = std::move(e);
  } else if (kind == "gdelta") {
    params = analysis::Gdelta{vector(a["x"], dim), a["s_max"].count()};
  } else if (kind == "certify_set") {
    const bool rec = a.optional("record_values") ? a["record_values"].boolean() : false;
    params = analysis::CertifySet{parse_balls(a, dim), margin, rec};
  } else if (kind == "construct") {
    const Node th = a["theta"];
    const double theta = th.number();
    if (!(theta > 0.0 && theta < 1.0)) throw SchemaError(th.path(), "theta must lie in (0, 1)");
    const Node b = a["ball"];
    Ball bb = ball(b, dim);
    if (!(bb.radius > 0.0 && bb.radius < 1.0)) throw SchemaError(b.child_path("radius"), "construction needs 0 < radius < 1");
    params = analysis::Construct{std::move(bb), a["steps"].count(), theta};
  } else if (kind == "orbit_ratio") {
    Vector x = vector(a["x"], dim);
    std::vector<Vector> probes;
    if (auto p = a.optional("probes"))
      for (std::size_t i = 0; i < p->size(); ++i) probes.push_back(vector(p->at(i), dim));
    if (auto rp = a.optional("random_probes")) {
      const Node r = *rp;
      const Ball region = ball(r, dim);
      const std::size_t count = r["count"].count();
      Rng rng(cfg.seed, 0x0b17);
      for (std::size_t i = 0; i < count; ++i) probes.push_back(sample_in_ball(region, rng));
    }
    if (probes.empty()) throw SchemaError(a.child_path("probes"), "required field missing (or give 'random_probes')");
    params = analysis::OrbitRatio{std::move(x), std::move(probes), a["delta"].positive()};
  } else if (kind == "group_scan") {
    if (!cfg.group) throw SchemaError(a.child_path("kind"), "group_scan needs a creg_grid operator_set");
    const std::size_t samples = a.optional("axioms_samples") ? a["axioms_samples"].count() : 16;
    params = analysis::GroupScan{parse_balls(a, dim), margin, samples};
  } else if (kind == "transfer_check") {
    const std::size_t enl = a.optional("enlargement") ? a["enlargement"].count() : 10;
    const std::size_t sample = a.optional("sample") ? a["sample"].count() : 3;
    Sequence lambda = parse_sequence(a["sequence"]);
    if (!lambda.unimodular(cfg.tolerances.unimodular))
      throw SchemaError(a.child_path("sequence"), "sequence has terms off the unit circle", ErrorKind::NotUnimodular);
    params = analysis::TransferCheck{vector(a["x"], dim), a["eps"].positive(), std::move(lambda), enl, sample};
  } else {
    unknown_kind(a, kind,
                 "residual, eps_recurrent, gdelta, certify_set, construct, orbit_ratio, group_scan, transfer_check");
  }
  return AnalysisSpec{kind, a.path(), budget, std::move(*params)};
}

inline Tolerances parse_tolerances(const std::optional<Node>& n) {
  Tolerances t;
  if (!n) return t;
  n->expect_object();
  for (auto it = n->json().begin(); it != n->json().end(); ++it) {
    const Node v((*n)[it.key()]);
    const std::string& k = it.key();
    if (k == "commutation") t.commutation = v.positive();
    else if (k == "inverse") t.inverse = v.positive();
    else if (k == "unimodular") t.unimodular = v.positive();
    else if (k == "slack") t.slack = v.positive();
    else if (k == "certify_margin") t.certify_margin = v.positive();
    else throw SchemaError(v.path(), "unknown tolerance");
  }
  return t;
}

}  // namespace config_detail

/// Parses and validates a config document. Operators and sets are built here,
/// so construction errors (NotUnimodular, NotCommuting, WindowViolation, ...)
/// surface as SchemaError carrying both the location and the original kind.
inline AnalysisConfig parse_config(const Json& doc) {
  using config_detail::Node;
  const Node root(doc, "");
  root.expect_object();

  const Node space = root["space"];
  const std::size_t dim = space["dim"].count();
  NormKind norm = NormKind::L2;
  if (auto p = space.optional("norm_p")) {
    if (p->json().is_string() && p->json() == "inf") norm = NormKind::LInf;
    else if (!(p->json().is_number() && p->number() == 2.0))
      throw SchemaError(p->path(), "norm_p must be 2 or \"inf\"");
  }

  std::optional<TruncationWindow> window;
  if (auto w = space.optional("window")) {
    window = TruncationWindow{dim, (*w)["support_bound"].count(), (*w)["power_bound"].unsigned_int()};
    if (auto wd = w->optional("dim"); wd && wd->count() != dim)
      throw SchemaError(wd->path(), "window dimension differs from space dimension", ErrorKind::DimensionMismatch);
  }

  Tolerances tol = config_detail::parse_tolerances(root.optional("tolerances"));
  std::optional<GroupContext> group;
  OperatorSet set = config_detail::parse_set(root["operator_set"], dim, tol, &group);

  AnalysisConfig cfg{doc, dim, norm, window, std::move(set), std::move(group),
                     root.optional("seed") ? root["seed"].unsigned_int() : 0,
                     root["budget"].count(), tol, {}};

  const Node analyses = root["analyses"];
  for (std::size_t i = 0; i < analyses.size(); ++i)
    cfg.analyses.push_back(config_detail::parse_analysis(analyses.at(i), cfg));

  if (cfg.window) {
    // Every vector that will be iterated must stay inside the window.
    for (const auto& a : cfg.analyses) {
      const Node where(doc, a.path);
      const auto* pw = cfg.set.as<sets::Powers>();
      const Operator first = pw ? pw->base : cfg.set.at(1).value();
      const std::uint64_t max_power = pw ? pw->start_exponent + a.budget - 1 : a.budget;
      auto check = [&](const Vector& x, std::uint64_t max_power) {
        config_detail::at_path(where, [&] {
          validate_window(*cfg.window, first, x, max_power);
          return 0;
        });
      };
      if (const auto* r = std::get_if<analysis::Residual>(&a.params)) check(r->x, max_power);
      if (const auto* g = std::get_if<analysis::Gdelta>(&a.params)) check(g->x, max_power);
      if (const auto* e = std::get_if<analysis::EpsRecurrent>(&a.params))
        for (const auto& x : e->xs) check(x, max_power);
    }
  }
  return cfg;
}

inline AnalysisConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace opdyn
