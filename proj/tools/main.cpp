// Command-line front end: run one configuration, compare two run
// directories, or sweep the system size and fit resource scaling.
//
// Exit codes: 0 success, 2 configuration or usage problems, 3 runtime
// failures (a non-convergent state preparation, unreadable outputs, ...).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "avqds/experiment.hpp"

namespace {

namespace fs = std::filesystem;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw avqds::ConfigError(path, "cannot read file");
  try {
    return nlohmann::json::parse(std::string((std::istreambuf_iterator<char>(in)),
                                             std::istreambuf_iterator<char>()),
                                 nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw avqds::ConfigError(path, e.what());
  }
}

int do_run(const std::string& config_path, std::string out_dir) {
  if (out_dir.empty())
    out_dir = fs::path(config_path).stem().string() + "_run";
  const avqds::ResolvedExperiment ex = avqds::resolve_experiment(load_json_file(config_path));
  const avqds::RunSummary sum = avqds::run_experiment(ex, out_dir);

  std::printf("wrote %s\n", (fs::path(out_dir) / "trajectory.csv").string().c_str());
  std::printf("  rows            %ld\n", sum.rows);
  if (ex.method == avqds::MethodKind::kAvqds) {
    std::printf("  parameters      %ld\n", sum.final_n_theta);
    std::printf("  two-qubit rots  %ld\n", sum.final_two_qubit);
    std::printf("  cnot count      %ld\n", sum.final_n_cx);
    if (sum.stall_events > 0)
      std::printf("  stalled rows    %ld (first at t = %.6f)\n", sum.stall_events,
                  sum.first_stall_t);
  } else if (ex.method == avqds::MethodKind::kTrotter) {
    std::printf("  cnots total     %ld\n", sum.final_n_cx);
  }
  std::printf("  wall time       %.3f s\n", sum.wall_seconds);
  return 0;
}

int do_compare(const std::string& dir_a, const std::string& dir_b,
               const std::string& out_file) {
  const avqds::CompareReport report = avqds::compare_runs(dir_a, dir_b);

  std::printf("trajectory deviation (a = test, b = reference)\n");
  for (const auto& c : report.columns)
    std::printf("  %-16s s = %.6e\n", c.name.c_str(), c.s);
  if (report.has_gates) {
    std::printf("final cnot counts  a = %.0f, b = %.0f", report.n_cx_a,
                report.n_cx_b);
    if (report.has_gate_ratio)
      std::printf("  (b/a = %.2f)", report.gate_ratio_b_over_a);
    std::printf("\n");
  }
  if (report.has_state)
    std::printf("final state t = %g  fidelity = %.12f\n", report.state_t,
                report.state_fidelity_ab);
  avqds::detail::write_text_atomic(out_file, report.to_json().dump(2) + "\n");
  std::printf("wrote %s\n", out_file.c_str());
  return 0;
}

int do_sweep(const std::string& template_path, const std::string& grid_spec,
             std::string out_dir, int threads) {
  if (out_dir.empty())
    out_dir = fs::path(template_path).stem().string() + "_sweep";
  const avqds::SweepGrid grid = avqds::parse_grid(grid_spec);
  const avqds::SweepResult result =
      avqds::run_sweep(load_json_file(template_path), grid, out_dir, threads);

  std::printf("%4s %10s %14s %10s %8s\n", "n", "n_theta", "n_two_qubit", "n_cx",
              "stalls");
  bool any_failed = false;
  for (const auto& p : result.points) {
    if (p.ok)
      std::printf("%4d %10ld %14ld %10ld %8ld\n", p.n, p.summary.final_n_theta,
                  p.summary.final_two_qubit, p.summary.final_n_cx,
                  p.summary.stall_events);
    else {
      std::printf("%4d failed: %s\n", p.n, p.error.c_str());
      any_failed = true;
    }
  }
  for (const auto& [name, fits] : result.fits) {
    if (!fits.fitted) continue;
    std::printf("%s\n", name.c_str());
    std::printf("  power        %.3f * n^%.3f   (rms rel %.3f)\n",
                fits.power.amplitude, fits.power.exponent, fits.power.rms_rel);
    std::printf("  quadratic    %.3f * n^2       (rms rel %.3f)\n",
                fits.quadratic.coefficient, fits.quadratic.rms_rel);
    std::printf("  exponential  %.3f * (e^(n/%.2f) - 1)  (rms rel %.3f)\n",
                fits.exponential.coefficient, fits.exponential.beta,
                fits.exponential.rms_rel);
  }
  std::printf("wrote %s\n", (fs::path(out_dir) / "sweep_fits.json").string().c_str());
  return any_failed ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive variational quantum dynamics on spin chains"};
  app.require_subcommand(1);
  bool seedless = false;
  app.add_flag("--seedless", seedless,
               "no-op; every computation here is deterministic, the flag "
               "documents the absence of random number generation");

  auto* run = app.add_subcommand("run", "simulate one configuration");
  std::string config_path, run_out;
  run->add_option("config", config_path, "JSON configuration file")->required();
  run->add_option("--out", run_out, "output directory (default: <config stem>_run)");

  auto* compare =
      app.add_subcommand("compare", "trajectory deviation between two runs");
  std::string dir_a, dir_b, compare_out = "compare.json";
  compare->add_option("dir_a", dir_a, "test run directory")->required();
  compare->add_option("dir_b", dir_b, "reference run directory")->required();
  compare->add_option("--out", compare_out, "report file (default: compare.json)");

  auto* sweep =
      app.add_subcommand("sweep", "scan the system size and fit resource scaling");
  std::string template_path, grid_spec, sweep_out;
  int threads = 1;
  sweep->add_option("template", template_path, "JSON configuration template")
      ->required();
  sweep->add_option("--grid", grid_spec, "system sizes, n=<from>:<to>[:<step>]")
      ->required();
  sweep->add_option("--out", sweep_out,
                    "output directory (default: <template stem>_sweep)");
  sweep->add_option("--threads", threads, "worker threads (default: 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return do_run(config_path, run_out);
    if (*compare) return do_compare(dir_a, dir_b, compare_out);
    return do_sweep(template_path, grid_spec, sweep_out, threads);
  } catch (const avqds::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
