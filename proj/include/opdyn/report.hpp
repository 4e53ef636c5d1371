#pragma once

// Runs the analyses of a parsed config and assembles a single JSON report.
// Reports are deterministic given (config, seed) apart from "timing_ms" keys.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>

#include "opdyn/config.hpp"
#include "opdyn/transforms.hpp"

#ifndef OPDYN_VERSION
#define OPDYN_VERSION "0.1.0"
#endif

namespace opdyn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitConfigError = 3;

struct RunOptions {
  std::size_t workers = 1;
};

struct RunResult {
  Json report;
  int exit_code = kExitOk;
};

namespace report_detail {

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (std::size_t i = 0; i < v.dim(); ++i) a.push_back(to_json(v[i]));
  return a;
}

inline Json to_json(const Ball& b) { return {{"center", to_json(b.center)}, {"radius", b.radius}}; }

inline Json to_json(const std::optional<RecurrenceWitness>& w) {
  if (!w) return nullptr;
  Json j{{"op_index", w->op_index}, {"residual", num(w->residual)}};
  if (w->point) j["point"] = to_json(*w->point);
  return j;
}

inline Json to_json(const SetRecurrenceCertificate& c) {
  return {{"op_index", c.op_index}, {"z", to_json(c.z)}, {"value", num(c.value)}, {"margin", num(c.margin)}};
}

inline Json ball_outcome(const Ball& b, const BallOutcome& o, std::size_t budget) {
  Json j = to_json(b);
  j["certificate"] = o.certificate ? to_json(*o.certificate) : Json(nullptr);
  j["min_value"] = num(o.min_value);
  j["min_value_index"] = o.min_value_index;
  j["evaluated"] = o.evaluated;
  if (!o.values.empty()) {
    Json v = Json::array();
    for (double x : o.values) v.push_back(num(x));
    j["values"] = std::move(v);
  }
  bool proven = false;
  if (o.closed_form_lower_bound) {
    j["closed_form_lower_bound"] = num(*o.closed_form_lower_bound);
    proven = *o.closed_form_lower_bound > b.radius;
  }
  j["nonreturn_proven"] = proven;
  if (o.solver_failure) j["solver_failure"] = *o.solver_failure;
  // a missing certificate is a finite statement unless a closed-form bound rules out every index
  j["budget_relative"] = !o.certificate && !proven;
  if (!o.certificate) j["within_budget"] = budget;
  return j;
}

inline Json trace_json(const NestedBallTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"op_index", s.op_index},
                     {"x", to_json(s.x)},
                     {"radius", num(s.radius)},
                     {"return_value", num(s.return_value)},
                     {"op_norm", num(s.op_norm)}});
  Json j{{"start", to_json(t.start)}, {"start_radius", t.start_radius}, {"steps", std::move(steps)},
         {"certified_bounds", t.certified_bounds}, {"verified_residuals", t.verified_residuals}};
  j["y"] = t.y ? to_json(*t.y) : Json(nullptr);
  return j;
}

inline Json set_description(const OperatorSet& g) {
  Json j{{"kind", g.kind_name()}, {"dim", g.dim()}};
  if (const auto* d = g.as<sets::DirectSumSet>()) j["direct_sum_mode"] = to_string(d->mode);
  if (const auto* p = g.as<sets::Powers>()) {
    j["start_exponent"] = p->start_exponent;
    j["base"] = p->base.kind_name();
  }
  if (auto n = g.size()) j["size"] = *n;
  return j;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline const char* kZeroVectorNote =
    "x = 0 satisfies the residual condition trivially but is not a recurrent vector; it is rejected";

struct Context {
  const AnalysisConfig& cfg;
  Executor exec;
  bool solver_failure = false;
};

inline CertifyOptions certify_options(const Context& ctx, double margin, bool record) {
  CertifyOptions opt;
  opt.margin = margin;
  opt.record_values = record;
  opt.exec = ctx.exec;
  return opt;
}

inline Json run_one(Context& ctx, const AnalysisSpec& spec) {
  const AnalysisConfig& cfg = ctx.cfg;
  const EnumerationBudget budget(spec.budget);
  Json out{{"budget", spec.budget}};

  if (const auto* a = std::get_if<analysis::Residual>(&spec.params)) {
    const auto r = residual(cfg.set, a->x, budget, a->norm, ctx.exec);
    out["x"] = to_json(a->x);
    out["norm"] = a->norm == NormKind::L2 ? "2" : "inf";
    out["min_residual"] = num(r.min_residual);
    out["witness"] = to_json(r.witness);
    out["evaluated"] = r.evaluated;
    out["budget_relative"] = true;
    out["within_budget"] = spec.budget;
  } else if (const auto* a = std::get_if<analysis::EpsRecurrent>(&spec.params)) {
    Json items = Json::array();
    std::size_t found = 0;
    for (const auto& x : a->xs) {
      auto w = is_eps_recurrent(cfg.set, x, a->eps, budget, cfg.norm);
      found += w.has_value();
      Json it{{"x", to_json(x)}, {"witness", to_json(w)}, {"budget_relative", !w.has_value()}};
      if (!w) it["within_budget"] = spec.budget;
      items.push_back(std::move(it));
    }
    out["eps"] = a->eps;
    out["vectors"] = std::move(items);
    out["recurrent_count"] = found;
    out["all_recurrent"] = found == a->xs.size();
    out["budget_relative"] = found != a->xs.size();
    if (a->skipped_zero) {
      out["skipped_zero_vectors"] = a->skipped_zero;
      out["note"] = kZeroVectorNote;
    }
  } else if (const auto* a = std::get_if<analysis::Gdelta>(&spec.params)) {
    const auto r = gdelta_membership(cfg.set, a->x, a->s_max, budget, cfg.norm, ctx.exec);
    Json per = Json::array();
    for (const auto& w : r.per_s) per.push_back(to_json(w));
    out["x"] = to_json(a->x);
    out["s_max"] = a->s_max;
    out["member"] = r.member;
    out["per_s"] = std::move(per);
    out["budget_relative"] = !r.member;
    if (!r.member) out["within_budget"] = spec.budget;
  } else if (const auto* a = std::get_if<analysis::CertifySet>(&spec.params)) {
    const auto outcomes = certify_recurrent_set(cfg.set, a->balls, budget, certify_options(ctx, a->margin, a->record_values));
    Json balls = Json::array();
    Json certs = Json::array();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      balls.push_back(ball_outcome(a->balls[i], outcomes[i], spec.budget));
      if (outcomes[i].certificate) {
        Json c = to_json(*outcomes[i].certificate);
        c["ball"] = i;
        certs.push_back(std::move(c));
      }
      ctx.solver_failure |= outcomes[i].solver_failure.has_value();
    }
    out["balls"] = std::move(balls);
    out["certificates"] = std::move(certs);
    out["all_certified"] = out["certificates"].size() == outcomes.size();
  } else if (const auto* a = std::get_if<analysis::Construct>(&spec.params)) {
    out["ball"] = to_json(a->ball);
    out["steps_requested"] = a->steps;
    out["theta"] = a->theta;
    try {
      out["trace"] = trace_json(construct_recurrent_vector(cfg.set, a->ball, a->steps, a->theta, budget));
      out["succeeded"] = true;
    } catch (const StepFailed& e) {
      out["succeeded"] = false;
      out["failed_step"] = e.step();
      out["partial_trace"] = trace_json(e.partial());
      out["budget_relative"] = true;
      out["within_budget"] = spec.budget;
    }
  } else if (const auto* a = std::get_if<analysis::OrbitRatio>(&spec.params)) {
    out["x"] = to_json(a->x);
    out["delta"] = a->delta;
    out["probes"] = a->probes.size();
    out["ratio"] = orbit_covering_ratio(cfg.set, a->x, a->probes, a->delta, budget);
    out["budget_relative"] = true;
    out["within_budget"] = spec.budget;
  } else if (const auto* a = std::get_if<analysis::GroupScan>(&spec.params)) {
    const GroupContext& gc = *cfg.group;
    Rng rng(cfg.seed, 0xa1);
    std::vector<std::pair<Complex, Complex>> samples;
    for (std::size_t i = 0; i < a->axioms_samples; ++i) {
      const Complex z(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      const Complex w(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      samples.emplace_back(z, w);
    }
    const auto ax = axioms_defect(gc.group, samples);
    out["axioms"] = {{"composition_defect", num(ax.composition)}, {"initial_defect", num(ax.initial)},
                     {"samples", a->axioms_samples}};
    out["grid"] = {{"points", gc.grid.points.size()}, {"description", gc.grid.description}};
    const auto scan = group_recurrence_scan(gc.group, gc.grid, a->balls, certify_options(ctx, a->margin, false));
    Json balls = Json::array();
    Json certs = Json::array();
    for (std::size_t i = 0; i < scan.outcomes.size(); ++i) {
      Json b = ball_outcome(a->balls[i], scan.outcomes[i], gc.grid.points.size());
      if (const auto& c = scan.outcomes[i].certificate) {
        b["grid_point"] = to_json(gc.grid.points[c->op_index - 1]);
        Json cj = to_json(*c);
        cj["ball"] = i;
        cj["grid_point"] = b["grid_point"];
        certs.push_back(std::move(cj));
      }
      ctx.solver_failure |= scan.outcomes[i].solver_failure.has_value();
      balls.push_back(std::move(b));
    }
    out["balls"] = std::move(balls);
    out["certificates"] = std::move(certs);
    Json periods = Json::array();
    for (const auto& p : scan.period_points)
      periods.push_back({{"grid_index", p.grid_index}, {"z", to_json(p.z)}, {"exact_return", p.exact_return}});
    out["period_points"] = std::move(periods);
    if (gc.group.is_scalar_exponential()) {
      // Observed boundary for single operators S(z) = e^z: powers return iff |e^z| = 1, i.e. Re z = 0.
      Json pts = Json::array();
      const Vector e1 = Vector::basis(gc.group.dim(), 1);
      for (const auto& z : gc.grid.points) {
        if (z == Complex(0.0, 0.0)) continue;
        const auto r = single_operator_scan(gc.group, z, e1, budget);
        pts.push_back({{"z", to_json(z)}, {"abs_z", std::abs(z)}, {"re_z", z.real()},
                       {"min_residual", num(r.min_residual)}, {"within_budget", spec.budget}});
      }
      out["single_operator_boundary"] = std::move(pts);
    }
  } else if (const auto* a = std::get_if<analysis::TransferCheck>(&spec.params)) {
    TransferTolerances tol;
    tol.slack = cfg.tolerances.slack;
    const auto r = unimodular_transfer_check(cfg.set, a->lambda, a->x, a->eps, budget, a->enlargement, a->sample, tol);
    out["x"] = to_json(a->x);
    out["eps"] = a->eps;
    out["sequence"] = a->lambda.kind_name();
    out["forward"] = to_json(r.forward);
    out["backward"] = to_json(r.backward);
    out["forward_enlarged"] = to_json(r.forward_enlarged);
    out["enlarged_budget"] = r.enlarged_budget;
    out["validated_pairs"] = r.validated_pairs;
    out["agree"] = r.agree;
    out["budget_relative"] = !r.forward || !r.backward;
  }
  return out;
}

}  // namespace report_detail

/// Executes every analysis in order. Library errors are recorded on the
/// analysis and do not stop the batch.
inline RunResult run_analysis(const AnalysisConfig& cfg, const RunOptions& opt = {}) {
  using namespace report_detail;
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  Context ctx{cfg, Executor{std::max<std::size_t>(1, opt.workers)}};
  RunResult res;
  Json& rep = res.report;
  rep["library"] = "opdyn";
  rep["version"] = OPDYN_VERSION;
  rep["config_digest"] = "fnv1a64:" + hex(fnv1a(cfg.document.dump()));
  rep["seed"] = cfg.seed;
  rep["budget"] = cfg.budget;
  rep["space"] = {{"dim", cfg.dim}, {"norm_p", cfg.norm == NormKind::L2 ? Json(2) : Json("inf")}};
  if (cfg.window)
    rep["space"]["window"] = {{"support_bound", cfg.window->support_bound}, {"power_bound", cfg.window->power_bound}};
  rep["operator_set"] = set_description(cfg.set);

  Json results = Json::array();
  for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
    const auto& spec = cfg.analyses[i];
    const auto ta = Clock::now();
    Json entry{{"index", i}, {"kind", spec.kind}};
    try {
      entry["result"] = run_one(ctx, spec);
      entry["status"] = "ok";
    } catch (const Error& e) {
      entry["status"] = "error";
      entry["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
      if (e.kind() == ErrorKind::ZeroVector) entry["error"]["note"] = kZeroVectorNote;
      if (e.kind() == ErrorKind::SolverFailure) ctx.solver_failure = true;
    }
    entry["timing_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - ta).count();
    results.push_back(std::move(entry));
  }
  rep["analyses"] = std::move(results);
  rep["timing_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  res.exit_code = ctx.solver_failure ? kExitSolverFailure : kExitOk;
  return res;
}

/// Copy of a report with every "timing_ms" key removed.
inline Json strip_timings(Json j) {
  if (j.is_object()) {
    j.erase("timing_ms");
    for (auto& [k, v] : j.items()) v = strip_timings(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timings(v);
  }
  return j;
}

}  // namespace opdyn
