// opdyn command line: config-driven analyses and the built-in scenarios.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "opdyn/opdyn.hpp"

namespace {

using opdyn::Json;

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw opdyn::SchemaError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw opdyn::SchemaError("", std::string("invalid JSON: ") + e.what());
  }
}

Json parse_arg_json(const std::string& text, const std::string& flag) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    throw opdyn::SchemaError(flag, "expected JSON, e.g. [[1,0],[0,0]]");
  }
}

void write_report(const Json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << text;
}

std::size_t effective_workers(std::size_t flag) {
  if (const char* env = std::getenv("OPDYN_WORKERS"); env && *env) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring OPDYN_WORKERS='" << env << "'\n";
  }
  return flag;
}

int analyze(Json doc, std::optional<std::uint64_t> seed, std::size_t workers, const std::string& out) {
  if (seed && doc.is_object()) doc["seed"] = *seed;
  const auto cfg = opdyn::parse_config(doc);
  const auto res = opdyn::run_analysis(cfg, {effective_workers(workers)});
  write_report(res.report, out);
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opdyn: recurrence experiments for families of linear operators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(OPDYN_VERSION));

  std::string config_path, out_path, center_text;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  double radius = 0.0, margin = 0.0, theta = 0.5;
  std::size_t steps = 8;
  std::string example_name;

  auto* an = app.add_subcommand("analyze", "run every analysis of a config file");
  an->add_option("--config", config_path, "config JSON")->required();
  an->add_option("--out", out_path, "report path ('-' for stdout)")->required();
  an->add_option("--seed", seed, "override the config seed");
  an->add_option("--workers", workers, "worker threads (OPDYN_WORKERS overrides)")->check(CLI::PositiveNumber);

  auto* ex = app.add_subcommand("examples", "built-in scenarios");
  ex->require_subcommand(1);
  auto* ex_list = ex->add_subcommand("list", "list scenario names");
  auto* ex_run = ex->add_subcommand("run", "run a scenario and check its stored expectations");
  ex_run->add_option("name", example_name, "scenario name")->required();
  ex_run->add_option("--out", out_path, "report path ('-' for stdout)");
  ex_run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* cs = app.add_subcommand("certify-set", "certify one ball against the config's operator set");
  cs->add_option("--config", config_path, "config JSON (analyses are replaced)")->required();
  cs->add_option("--center", center_text, "ball center as JSON, e.g. [[1,0],[0,0]]")->required();
  cs->add_option("--radius", radius, "ball radius")->required();
  cs->add_option("--margin", margin, "required margin (default 1e-6 * radius)");
  cs->add_option("--out", out_path, "report path ('-' for stdout)");
  cs->add_option("--seed", seed, "override the config seed");
  cs->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* co = app.add_subcommand("construct", "nested-ball construction of a recurrent vector");
  co->add_option("--config", config_path, "config JSON (analyses are replaced)")->required();
  co->add_option("--center", center_text, "starting ball center as JSON")->required();
  co->add_option("--radius", radius, "starting radius, 0 < r < 1")->required();
  co->add_option("--steps", steps, "number of nested steps");
  co->add_option("--theta", theta, "shrink factor in (0, 1)");
  co->add_option("--out", out_path, "report path ('-' for stdout)");
  co->add_option("--seed", seed, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*an) return analyze(read_json_file(config_path), seed, workers, out_path);

    if (*ex_list) {
      for (const auto& n : opdyn::example_names()) std::cout << n << "  " << opdyn::build_example(n).summary << "\n";
      return 0;
    }

    if (*ex_run) {
      const auto r = opdyn::run_example(example_name, {effective_workers(workers)});
      write_report(r.run.report, out_path.empty() ? "-" : out_path);
      for (const auto& o : r.outcomes)
        std::cerr << (o.passed ? "pass " : "FAIL ") << o.expectation.pointer << "  " << o.detail << "\n";
      if (r.run.exit_code != 0) return r.run.exit_code;
      return r.passed() ? 0 : 1;
    }

    if (*cs || *co) {
      Json doc = read_json_file(config_path);
      Json ball{{"center", parse_arg_json(center_text, "--center")}, {"radius", radius}};
      Json a;
      if (*cs) {
        a = {{"kind", "certify_set"}, {"balls", Json::array({ball})}};
        if (margin > 0.0) a["margin"] = margin;
      } else {
        a = {{"kind", "construct"}, {"ball", ball}, {"steps", steps}, {"theta", theta}};
      }
      doc["analyses"] = Json::array({a});
      return analyze(doc, seed, workers, out_path.empty() ? "-" : out_path);
    }
  } catch (const opdyn::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return opdyn::kExitConfigError;
  } catch (const opdyn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return opdyn::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
