#include <CLI11.hpp>

#include "holab/runner.hpp"

#include <cstdio>
#include <iostream>

using namespace holab;

namespace {

int run_one(const std::string& command, const std::string& scenario_name, RunParams params) {
  const Scenario scenario = load_scenario(scenario_name);
  const RunReport report = run_command(command, scenario, params);

  for (const std::string& line : report.summary) std::cout << line << "\n";
  for (const std::string& line : report.warnings) std::cout << "WARN " << line << "\n";

  const std::string out_dir = params.out_dir.empty() ? "." : params.out_dir;
  std::vector<std::string> files = write_report_files(report, out_dir);
  std::vector<std::string> plot_warnings;
  const std::vector<std::string> plots = emit_plots(report, out_dir, &plot_warnings);
  files.insert(files.end(), plots.begin(), plots.end());
  for (const std::string& w : plot_warnings) std::cout << "WARN " << w << "\n";
  for (const std::string& f : files) std::cout << "wrote " << f << "\n";
  std::printf("%s %s: %s in %.1f ms\n", report.scenario.c_str(), report.command.c_str(),
              report.pass ? "PASS" : "FAIL", report.timing_ms);
  return report.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holab: holonomy, connections and curvature on trivialized principal bundles"};
  app.require_subcommand(1);

  RunParams params;
  std::string scenario_name;
  std::string sign = "oracle";
  std::string format = "json";

  for (const std::string& command : command_names()) {
    CLI::App* sub = app.add_subcommand(command, "run the " + command + " pipeline");
    sub->add_option("--scenario", scenario_name,
                    "built-in scenario name or path to a scenario JSON file")
        ->required();
    sub->add_option("--steps", params.steps, "integrator steps (default 1000)");
    sub->add_option("--tol", params.tol, "check tolerance (default per command)");
    sub->add_option("--loops", params.loops, "random loop count (default 100)");
    sub->add_option("--seed", params.seed, "RNG seed (default 42)");
    sub->add_option("--sign-convention", sign, "curvature commutator sign: oracle|paper");
    sub->add_option("--out", params.out_dir, "output directory for reports (default .)");
    sub->add_option("--format", format, "report format: json|csv");
  }

  CLI11_PARSE(app, argc, argv);

  if (sign == "paper")
    params.sign = CurvatureSign::Paper;
  else if (sign != "oracle") {
    std::cerr << "error: --sign-convention must be 'oracle' or 'paper'\n";
    return 1;
  }
  if (format == "csv")
    params.format = RunParams::Format::Csv;
  else if (format != "json") {
    std::cerr << "error: --format must be 'json' or 'csv'\n";
    return 1;
  }

  try {
    return run_one(app.get_subcommands().front()->get_name(), scenario_name, params);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
