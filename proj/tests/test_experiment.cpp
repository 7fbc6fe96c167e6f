#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avqds/experiment.hpp"

using namespace avqds;
namespace fs = std::filesystem;

namespace {

// fresh scratch directory, removed when the guard leaves scope
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("avqds_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

nlohmann::json quench_config() {
  return nlohmann::json{
      {"model", {{"name", "tfim"}, {"n", 3}, {"h_x", -2.0}, {"periodic", true}}},
      {"schedule", {{"type", "constant"}}},
      {"t_final", 0.2},
      {"method", {{"type", "avqds"}}},
      {"initial_state", {{"type", "product"}}},
      {"observables", {"energy", "loschmidt", "corr_zz_0_1"}},
  };
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config rejects unknown and misplaced keys", "[experiment]") {
  auto cfg = quench_config();
  cfg["method"]["dt_exactt"] = 1e-4;
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("method.dt_exactt"));

  cfg = quench_config();
  cfg["model"]["gamma"] = 0.5;  // tfim has no anisotropy knob
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("model.gamma"));

  // the ramp drives gamma itself
  nlohmann::json ramp = {
      {"model", {{"name", "lsm"}, {"n", 4}, {"h_z", -0.7}, {"gamma", 1.0}}},
      {"schedule", {{"type", "lsm_ramp"}, {"ramp_time", 3.0}}},
      {"t_final", 1.0},
      {"method", {{"type", "exact"}}},
      {"initial_state", {{"type", "product"}}},
  };
  CHECK_THROWS_WITH(resolve_experiment(ramp),
                    Catch::Matchers::ContainsSubstring("model.gamma"));
  ramp["model"].erase("gamma");
  CHECK_NOTHROW(resolve_experiment(ramp));

  // a constant lsm schedule needs the anisotropy spelled out
  nlohmann::json frozen = ramp;
  frozen["schedule"] = {{"type", "constant"}};
  CHECK_THROWS_WITH(resolve_experiment(frozen),
                    Catch::Matchers::ContainsSubstring("model.gamma"));
}

TEST_CASE("config validation covers types and ranges", "[experiment]") {
  auto cfg = quench_config();
  cfg["t_final"] = -1.0;
  CHECK_THROWS_AS(resolve_experiment(cfg), ConfigError);

  cfg = quench_config();
  cfg["model"]["n"] = 1;
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("model.n"));

  cfg = quench_config();
  cfg["model"]["n"] = 2;  // ring needs three sites
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("model.periodic"));
  cfg["model"]["periodic"] = false;
  CHECK_NOTHROW(resolve_experiment(cfg));

  cfg = quench_config();
  cfg["observables"] = {"energy", "energy"};
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("observables[1]"));

  cfg = quench_config();
  cfg["observables"] = {"corr_zz_0_3"};  // off the chain
  CHECK_THROWS_AS(resolve_experiment(cfg), ConfigError);
  cfg["observables"] = {"corr_zz_1_1"};
  CHECK_THROWS_AS(resolve_experiment(cfg), ConfigError);
  cfg["observables"] = {"corr_xy_0_1"};
  CHECK_THROWS_AS(resolve_experiment(cfg), ConfigError);
  cfg["observables"] = {"magnetization"};
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("observables[0]"));

  cfg = quench_config();
  cfg["output"] = {{"snapshot_times", {0.1, 0.5}}};  // 0.5 > t_final
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("snapshot_times"));

  cfg = quench_config();
  cfg["initial_state"]["bits"] = {0, 1};  // one bit short
  CHECK_THROWS_WITH(resolve_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("initial_state.bits"));
}

TEST_CASE("normalization is a fixed point of resolution", "[experiment]") {
  auto cfg = quench_config();
  cfg["output"] = {{"snapshot_times", {0.2, 0.1, 0.2}}};  // unsorted, duplicated
  const ResolvedExperiment ex = resolve_experiment(cfg);

  // defaults are spelled out
  CHECK(ex.normalized["model"]["j"] == 1.0);
  CHECK(ex.normalized["method"]["l2_cut"] == 1e-3);
  CHECK(ex.normalized["method"]["pool"] == "hamiltonian");
  CHECK(ex.normalized["method"]["dt_exact"] == 5e-4);
  CHECK(ex.normalized["initial_state"]["bits"] == nlohmann::json({0, 0, 0}));
  CHECK(ex.normalized["output"]["write_states"] == true);
  CHECK(ex.normalized["output"]["snapshot_times"] == nlohmann::json({0.1, 0.2}));

  const ResolvedExperiment again = resolve_experiment(ex.normalized);
  CHECK(again.normalized == ex.normalized);

  // ramp config round-trips too
  nlohmann::json ramp = {
      {"model", {{"name", "lsm"}, {"n", 4}, {"h_z", -0.7}}},
      {"schedule", {{"type", "lsm_ramp"}, {"ramp_time", 3.0}}},
      {"t_final", 3.0},
      {"method", {{"type", "trotter"}}},
      {"initial_state", {{"type", "product"}, {"bits", {0, 1, 0, 1}}}},
  };
  const ResolvedExperiment rex = resolve_experiment(ramp);
  CHECK(rex.normalized["method"]["dt"] == 5e-3);
  CHECK(resolve_experiment(rex.normalized).normalized == rex.normalized);
}

TEST_CASE("trajectory files are byte deterministic", "[experiment]") {
  ScratchDir dir("determinism");
  auto cfg = quench_config();
  cfg["output"] = {{"snapshot_times", {0.1}}};
  const ResolvedExperiment ex = resolve_experiment(cfg);
  run_experiment(ex, dir.path / "a");
  run_experiment(ex, dir.path / "b");
  CHECK(read_file(dir.path / "a/trajectory.csv") ==
        read_file(dir.path / "b/trajectory.csv"));
  CHECK(read_file(dir.path / "a/state_t0.100000.json") ==
        read_file(dir.path / "b/state_t0.100000.json"));
  CHECK(read_file(dir.path / "a/ansatz_t0.100000.json") ==
        read_file(dir.path / "b/ansatz_t0.100000.json"));

  // no leftover temporaries from the atomic writes
  for (const auto& entry : fs::recursive_directory_iterator(dir.path))
    CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("column layout tracks the method", "[experiment]") {
  ScratchDir dir("columns");
  auto cfg = quench_config();

  run_experiment(resolve_experiment(cfg), dir.path / "avqds");
  std::string header = read_file(dir.path / "avqds/trajectory.csv");
  header = header.substr(0, header.find('\n'));
  CHECK(header == "t,energy,loschmidt,corr_zz_0_1,n_theta,n_cx,L2,dt");

  cfg["method"] = {{"type", "trotter"}, {"dt", 0.01}};
  run_experiment(resolve_experiment(cfg), dir.path / "trotter");
  header = read_file(dir.path / "trotter/trajectory.csv");
  header = header.substr(0, header.find('\n'));
  CHECK(header == "t,energy,loschmidt,corr_zz_0_1,n_cx,dt");

  cfg["method"] = {{"type", "exact"}, {"dt", 0.01}};
  run_experiment(resolve_experiment(cfg), dir.path / "exact");
  const std::string text = read_file(dir.path / "exact/trajectory.csv");
  header = text.substr(0, text.find('\n'));
  CHECK(header == "t,energy,loschmidt,corr_zz_0_1,dt");

  // 0.2 / 0.01 steps plus the t = 0 row
  CHECK(std::count(text.begin(), text.end(), '\n') == 22);
}

TEST_CASE("snapshots reproduce the trajectory state", "[experiment]") {
  ScratchDir dir("snapshots");
  auto cfg = quench_config();
  cfg["output"] = {{"snapshot_times", {0.13, 0.2}}};
  const ResolvedExperiment ex = resolve_experiment(cfg);
  run_experiment(ex, dir.path / "run");

  for (const char* tag : {"0.130000", "0.200000"}) {
    const StateSnapshot snap = state_from_json(
        read_file(dir.path / "run" / (std::string("state_t") + tag + ".json")));
    const Ansatz circuit =
        ansatz_from_json(read_file(dir.path / "run" /
                                   (std::string("ansatz_t") + tag + ".json")),
                         zero_state(3));
    const StateVector rebuilt = circuit.evaluate();
    CHECK((rebuilt.amps - snap.state.amps).norm() < 1e-12);
  }

  // the landing mechanism puts a record exactly on the requested time
  const StateSnapshot mid = state_from_json(
      read_file(dir.path / "run/state_t0.130000.json"));
  CHECK(mid.t == 0.13);
}

TEST_CASE("state JSON round-trips amplitudes exactly", "[experiment]") {
  StateVector s = zero_state(2);
  s.amps << complex(0.1234567890123456, -0.5), complex(0.0, 0.25),
      complex(-1.0 / 3.0, 1e-300), complex(0.7, 0.0);
  const StateSnapshot back = state_from_json(state_to_json(s, 1.5));
  CHECK(back.t == 1.5);
  REQUIRE(back.state.n_qubits == 2);
  for (int k = 0; k < 4; ++k) CHECK(back.state.amps(k) == s.amps(k));

  CHECK_THROWS_AS(state_from_json("{]"), std::invalid_argument);
  CHECK_THROWS_AS(state_from_json("{\"n_qubits\": 2, \"t\": 0, \"amps\": []}"),
                  std::invalid_argument);
}

TEST_CASE("a run compared against itself deviates by zero", "[experiment]") {
  ScratchDir dir("selfcmp");
  auto cfg = quench_config();
  cfg["output"] = {{"snapshot_times", {0.2}}};
  const ResolvedExperiment ex = resolve_experiment(cfg);
  run_experiment(ex, dir.path / "run");

  const CompareReport report = compare_runs(dir.path / "run", dir.path / "run");
  REQUIRE(report.columns.size() == 3);
  for (const auto& c : report.columns) CHECK(c.s == 0.0);
  CHECK(report.has_gates);
  CHECK(report.gate_ratio_b_over_a == 1.0);
  REQUIRE(report.has_state);
  CHECK(report.state_t == 0.2);
  CHECK(report.state_fidelity_ab == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("comparing disjoint column sets is an error", "[experiment]") {
  ScratchDir dir("disjoint");
  auto cfg = quench_config();
  cfg["observables"] = {"energy"};
  run_experiment(resolve_experiment(cfg), dir.path / "a");
  cfg["observables"] = {"loschmidt"};
  run_experiment(resolve_experiment(cfg), dir.path / "b");
  CHECK_THROWS_AS(compare_runs(dir.path / "a", dir.path / "b"),
                  std::invalid_argument);
}

TEST_CASE("scaling fits recover synthetic laws", "[experiment]") {
  std::vector<double> x, y_pow, y_quad, y_exp;
  for (int n = 3; n <= 10; ++n) {
    x.push_back(n);
    y_pow.push_back(1.7 * std::pow(n, 2.3));
    y_quad.push_back(0.8 * n * n);
    y_exp.push_back(0.45 * std::expm1(n / 2.5));
  }

  const PowerFit p = fit_power_law(x, y_pow);
  CHECK(p.amplitude == Catch::Approx(1.7).epsilon(1e-10));
  CHECK(p.exponent == Catch::Approx(2.3).epsilon(1e-10));
  CHECK(p.rms_rel < 1e-10);

  const QuadraticFit q = fit_quadratic_coefficient(x, y_quad);
  CHECK(q.coefficient == Catch::Approx(0.8).epsilon(1e-12));
  CHECK(q.rms_rel < 1e-12);

  const ExponentialFit e = fit_exponential_minus_one(x, y_exp);
  CHECK(e.beta == Catch::Approx(2.5).epsilon(2e-3));
  CHECK(e.coefficient == Catch::Approx(0.45).epsilon(5e-3));
  CHECK(e.rms_rel < 1e-3);

  CHECK_THROWS_AS(fit_power_law({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {0.0, 2.0}), std::invalid_argument);
}

TEST_CASE("grid specs parse and reject malformed input", "[experiment]") {
  SweepGrid g = parse_grid("n=3:8");
  CHECK((g.from == 3 && g.to == 8 && g.step == 1));
  g = parse_grid("n=2:10:2");
  CHECK((g.from == 2 && g.to == 10 && g.step == 2));
  CHECK_THROWS_AS(parse_grid("m=3:8"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("n=8:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("n=3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("n=3:8:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("n=a:b"), std::invalid_argument);
}

TEST_CASE("sweeps record failures without aborting", "[experiment]") {
  ScratchDir dir("sweep");
  auto cfg = quench_config();
  cfg["t_final"] = 0.05;
  cfg.erase("observables");
  // n = 2 fails on the ring constraint; the rest proceed
  const SweepResult res = run_sweep(cfg, parse_grid("n=2:4"), dir.path / "out");
  REQUIRE(res.points.size() == 3);
  CHECK_FALSE(res.points[0].ok);
  CHECK(res.points[0].error.find("model.periodic") != std::string::npos);
  CHECK(res.points[1].ok);
  CHECK(res.points[2].ok);
  CHECK(fs::exists(dir.path / "out/point_n3/trajectory.csv"));
  CHECK(fs::exists(dir.path / "out/sweep.csv"));
  CHECK(fs::exists(dir.path / "out/sweep_fits.json"));
  CHECK_FALSE(fs::exists(dir.path / "out/point_n2/trajectory.csv"));

  // two successful points are too few for a three-parameter comparison
  for (const auto& [name, fits] : res.fits) {
    (void)name;
    CHECK_FALSE(fits.fitted);
  }
}

TEST_CASE("threaded sweeps match the sequential result", "[experiment]") {
  ScratchDir dir("threads");
  auto cfg = quench_config();
  cfg["t_final"] = 0.05;
  const SweepResult seq = run_sweep(cfg, parse_grid("n=3:5"), dir.path / "seq", 1);
  const SweepResult par = run_sweep(cfg, parse_grid("n=3:5"), dir.path / "par", 3);
  REQUIRE(seq.points.size() == par.points.size());
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    CHECK(seq.points[k].n == par.points[k].n);
    CHECK(seq.points[k].summary.final_n_theta == par.points[k].summary.final_n_theta);
    CHECK(seq.points[k].summary.final_n_cx == par.points[k].summary.final_n_cx);
  }
  CHECK(read_file(dir.path / "seq/sweep.csv") == read_file(dir.path / "par/sweep.csv"));
  CHECK(read_file(dir.path / "seq/point_n4/trajectory.csv") ==
        read_file(dir.path / "par/point_n4/trajectory.csv"));
}

TEST_CASE("initial state options prepare the advertised state", "[experiment]") {
  // dense_ground starts on the true ground state of the preparation side
  nlohmann::json cfg = {
      {"model", {{"name", "lsm"}, {"n", 4}, {"h_z", -0.7}}},
      {"schedule", {{"type", "lsm_ramp"}, {"ramp_time", 3.0}}},
      {"t_final", 0.5},
      {"method", {{"type", "avqds"}}},
      {"initial_state", {{"type", "dense_ground"}}},
  };
  const ResolvedExperiment ex = resolve_experiment(cfg);
  const auto g = ground_state(ex.schedule.preparation());
  CHECK(state_fidelity(ex.initial.evaluate(), g.state) ==
        Catch::Approx(1.0).margin(1e-12));

  // adapt_vqe reaches the same state variationally
  cfg["initial_state"] = {{"type", "adapt_vqe"}, {"grad_tol", 2e-4},
                          {"energy_tol", 1e-10}};
  const ResolvedExperiment vex = resolve_experiment(cfg);
  CHECK(state_fidelity(vex.initial.evaluate(), g.state) > 1.0 - 1e-5);
  CHECK(vex.initial.size() > 0);

  // ansatz_file reloads exactly what a snapshot wrote
  ScratchDir dir("ansatz_file");
  {
    Ansatz a(zero_state(4));
    a.append(parse_pauli("Y0 X1", 4), 0.3);
    a.append(parse_pauli("Z2 Y3", 4), -0.7);
    std::ofstream out(dir.path / "circuit.json", std::ios::binary);
    out << ansatz_to_json(a);
  }
  cfg["initial_state"] = {{"type", "ansatz_file"},
                          {"path", (dir.path / "circuit.json").string()}};
  const ResolvedExperiment fex = resolve_experiment(cfg);
  REQUIRE(fex.initial.size() == 2);
  CHECK(fex.initial.theta(0) == 0.3);
  CHECK(fex.initial.theta(1) == -0.7);

  cfg["initial_state"]["path"] = (dir.path / "missing.json").string();
  CHECK_THROWS_AS(resolve_experiment(cfg), ConfigError);
}

TEST_CASE("fidelity observables track an exact reference", "[experiment]") {
  ScratchDir dir("fidelity");
  auto cfg = quench_config();
  cfg["observables"] = {"fidelity", "infidelity"};
  cfg["method"]["dt_exact"] = 1e-4;
  run_experiment(resolve_experiment(cfg), dir.path / "run");

  const auto table =
      detail::read_trajectory_csv(dir.path / "run/trajectory.csv");
  const auto* fid = table.column("fidelity");
  const auto* inf = table.column("infidelity");
  REQUIRE(fid != nullptr);
  REQUIRE(inf != nullptr);
  for (std::size_t k = 0; k < fid->size(); ++k) {
    CHECK((*fid)[k] + (*inf)[k] == Catch::Approx(1.0).margin(1e-12));
    CHECK((*fid)[k] > 0.999);  // short quench stays on top of the reference
  }
}
