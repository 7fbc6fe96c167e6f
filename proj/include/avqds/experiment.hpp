#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "avqds/adapt_vqe.hpp"
#include "avqds/ansatz.hpp"
#include "avqds/dense.hpp"
#include "avqds/driver.hpp"
#include "avqds/evolvers.hpp"
#include "avqds/models.hpp"
#include "avqds/observables.hpp"
#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

inline constexpr const char* kVersion = "0.1.0";

// configuration problem at a named key path, e.g. "method.dt"
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline void require_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join_path(path, key), "unknown key");
  }
}

inline const nlohmann::json* find_key(const nlohmann::json& obj,
                                      const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double get_double(const nlohmann::json& obj, const std::string& path,
                         const std::string& key) {
  const auto* v = find_key(obj, key);
  if (!v) throw ConfigError(join_path(path, key), "missing required number");
  if (!v->is_number()) throw ConfigError(join_path(path, key), "expected a number");
  return v->get<double>();
}

inline double get_double_or(const nlohmann::json& obj, const std::string& path,
                            const std::string& key, double fallback) {
  const auto* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(join_path(path, key), "expected a number");
  return v->get<double>();
}

inline int get_int(const nlohmann::json& obj, const std::string& path,
                   const std::string& key) {
  const auto* v = find_key(obj, key);
  if (!v) throw ConfigError(join_path(path, key), "missing required integer");
  if (!v->is_number_integer())
    throw ConfigError(join_path(path, key), "expected an integer");
  return v->get<int>();
}

inline int get_int_or(const nlohmann::json& obj, const std::string& path,
                      const std::string& key, int fallback) {
  const auto* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ConfigError(join_path(path, key), "expected an integer");
  return v->get<int>();
}

inline bool get_bool_or(const nlohmann::json& obj, const std::string& path,
                        const std::string& key, bool fallback) {
  const auto* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(join_path(path, key), "expected a boolean");
  return v->get<bool>();
}

inline std::string get_string(const nlohmann::json& obj, const std::string& path,
                              const std::string& key) {
  const auto* v = find_key(obj, key);
  if (!v) throw ConfigError(join_path(path, key), "missing required string");
  if (!v->is_string()) throw ConfigError(join_path(path, key), "expected a string");
  return v->get<std::string>();
}

inline std::vector<int> get_bits_or_zeros(const nlohmann::json& obj,
                                          const std::string& path,
                                          const std::string& key, int n) {
  const auto* v = find_key(obj, key);
  if (!v) return std::vector<int>(static_cast<std::size_t>(n), 0);
  const std::string full = join_path(path, key);
  if (!v->is_array()) throw ConfigError(full, "expected an array of 0/1");
  if (static_cast<int>(v->size()) != n)
    throw ConfigError(full, "need one bit per site (" + std::to_string(n) + ")");
  std::vector<int> bits;
  bits.reserve(v->size());
  for (const auto& e : *v) {
    if (!e.is_number_integer() ||
        (e.get<int>() != 0 && e.get<int>() != 1))
      throw ConfigError(full, "entries must be 0 or 1");
    bits.push_back(e.get<int>());
  }
  return bits;
}

inline bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

struct CorrelatorSpec {
  char axis = 'z';
  int i = 0;
  int j = 0;
};

// "corr_<aa>_<i>_<j>" with aa in {xx, yy, zz}; returns nullopt when the name
// does not even look like a correlator
inline std::optional<CorrelatorSpec> parse_correlator(const std::string& name,
                                                      int n_qubits,
                                                      const std::string& path) {
  if (name.rfind("corr_", 0) != 0) return std::nullopt;
  std::vector<std::string> tok;
  std::size_t start = 0;
  for (;;) {
    const std::size_t us = name.find('_', start);
    if (us == std::string::npos) {
      tok.push_back(name.substr(start));
      break;
    }
    tok.push_back(name.substr(start, us - start));
    start = us + 1;
  }
  if (tok.size() != 4)
    throw ConfigError(path, "correlator form is corr_<aa>_<i>_<j>");
  if (tok[1] != "xx" && tok[1] != "yy" && tok[1] != "zz")
    throw ConfigError(path, "correlator axis must be xx, yy, or zz");
  if (!all_digits(tok[2]) || !all_digits(tok[3]))
    throw ConfigError(path, "correlator sites must be nonnegative integers");
  CorrelatorSpec spec;
  spec.axis = tok[1][0];
  spec.i = std::atoi(tok[2].c_str());
  spec.j = std::atoi(tok[3].c_str());
  if (spec.i >= n_qubits || spec.j >= n_qubits)
    throw ConfigError(path, "correlator site out of range for " +
                                std::to_string(n_qubits) + " qubits");
  if (spec.i == spec.j) throw ConfigError(path, "correlator sites must differ");
  return spec;
}

inline void validate_observable(const std::string& name, int n_qubits,
                                const std::string& path) {
  if (name == "energy" || name == "loschmidt" || name == "fidelity" ||
      name == "infidelity")
    return;
  if (parse_correlator(name, n_qubits, path)) return;
  throw ConfigError(path, "unknown observable '" + name + "'");
}

}  // namespace detail

enum class MethodKind { kAvqds, kTrotter, kExact };
enum class PoolKind { kHamiltonian, kTwoLocal };

// a validated configuration with every default filled in and the t = 0
// circuit already prepared
struct ResolvedExperiment {
  nlohmann::json normalized;
  Schedule schedule;
  double t_final = 0.0;
  MethodKind method = MethodKind::kAvqds;
  AvqdsConfig avqds;
  PoolKind pool = PoolKind::kHamiltonian;
  double mesh_dt = 5e-3;   // trotter/exact step
  double dt_exact = 5e-4;  // reference mesh behind fidelity observables
  Ansatz initial;
  std::vector<std::string> observables;
  std::vector<double> snapshot_times;
  bool write_states = true;
};

inline ResolvedExperiment resolve_experiment(const nlohmann::json& j) {
  using detail::find_key;
  using detail::get_bool_or;
  using detail::get_double;
  using detail::get_double_or;
  using detail::get_int;
  using detail::get_int_or;
  using detail::get_string;

  detail::require_object(j, "config");
  detail::reject_unknown(j, "", {"model", "schedule", "t_final", "method",
                                 "initial_state", "observables", "output"});

  // schedule type first; the accepted model keys depend on it
  const auto* sched_obj = find_key(j, "schedule");
  if (!sched_obj) throw ConfigError("schedule", "missing section");
  detail::require_object(*sched_obj, "schedule");
  const std::string sched_type = get_string(*sched_obj, "schedule", "type");
  if (sched_type != "constant" && sched_type != "lsm_ramp")
    throw ConfigError("schedule.type", "expected constant or lsm_ramp");
  const bool ramp = sched_type == "lsm_ramp";
  if (ramp)
    detail::reject_unknown(*sched_obj, "schedule", {"type", "ramp_time"});
  else
    detail::reject_unknown(*sched_obj, "schedule", {"type"});
  double ramp_time = 0.0;
  if (ramp) {
    ramp_time = get_double(*sched_obj, "schedule", "ramp_time");
    if (ramp_time <= 0.0) throw ConfigError("schedule.ramp_time", "must be positive");
  }
  nlohmann::json nsched;
  nsched["type"] = sched_type;
  if (ramp) nsched["ramp_time"] = ramp_time;

  const auto* model_obj = find_key(j, "model");
  if (!model_obj) throw ConfigError("model", "missing section");
  detail::require_object(*model_obj, "model");
  const std::string model = get_string(*model_obj, "model", "name");
  const int n = get_int(*model_obj, "model", "n");
  if (n < 2) throw ConfigError("model.n", "need at least two sites");
  if (n > kMaxStateQubits)
    throw ConfigError("model.n", "statevector caps at " +
                                     std::to_string(kMaxStateQubits) + " sites");
  const double coupling = get_double_or(*model_obj, "model", "j", 1.0);
  if (coupling == 0.0) throw ConfigError("model.j", "must be nonzero");

  nlohmann::json nmodel;
  nmodel["name"] = model;
  nmodel["n"] = n;
  nmodel["j"] = coupling;
  std::optional<Schedule> schedule;
  if (model == "lsm") {
    const double h_z = get_double(*model_obj, "model", "h_z");
    nmodel["h_z"] = h_z;
    if (ramp) {
      // the ramp drives the anisotropy itself, so gamma is not accepted here
      detail::reject_unknown(*model_obj, "model", {"name", "n", "j", "h_z"});
      schedule = Schedule::lsm_linear_ramp(n, coupling, h_z, ramp_time);
    } else {
      detail::reject_unknown(*model_obj, "model", {"name", "n", "j", "h_z", "gamma"});
      const double gamma = get_double(*model_obj, "model", "gamma");
      nmodel["gamma"] = gamma;
      schedule = Schedule::constant(lsm_hamiltonian(n, coupling, gamma, h_z));
    }
  } else if (model == "tfim" || model == "mfim") {
    if (ramp) throw ConfigError("schedule.type", "lsm_ramp needs model.name lsm");
    const double h_x = get_double(*model_obj, "model", "h_x");
    const double h_z =
        model == "mfim" ? get_double(*model_obj, "model", "h_z") : 0.0;
    const bool periodic = get_bool_or(*model_obj, "model", "periodic", true);
    if (model == "mfim")
      detail::reject_unknown(*model_obj, "model",
                             {"name", "n", "j", "h_x", "h_z", "periodic"});
    else
      detail::reject_unknown(*model_obj, "model",
                             {"name", "n", "j", "h_x", "periodic"});
    if (periodic && n < 3)
      throw ConfigError("model.periodic", "a ring needs at least three sites");
    nmodel["h_x"] = h_x;
    if (model == "mfim") nmodel["h_z"] = h_z;
    nmodel["periodic"] = periodic;
    schedule = Schedule::constant(mfim_hamiltonian(n, coupling, h_x, h_z, periodic));
  } else {
    throw ConfigError("model.name", "expected lsm, tfim, or mfim");
  }

  const auto* tf = find_key(j, "t_final");
  if (!tf || !tf->is_number()) throw ConfigError("t_final", "expected a number");
  const double t_final = tf->get<double>();
  if (t_final < 0.0) throw ConfigError("t_final", "must be >= 0");

  const auto* method_obj = find_key(j, "method");
  if (!method_obj) throw ConfigError("method", "missing section");
  detail::require_object(*method_obj, "method");
  const std::string method_name = get_string(*method_obj, "method", "type");
  MethodKind method = MethodKind::kAvqds;
  AvqdsConfig acfg;
  PoolKind pool = PoolKind::kHamiltonian;
  double mesh_dt = 5e-3;
  nlohmann::json nmethod;
  nmethod["type"] = method_name;
  if (method_name == "avqds") {
    detail::reject_unknown(*method_obj, "method",
                           {"type", "l2_cut", "xi", "dtheta_max", "dt_max",
                            "improvement_floor", "max_adds_per_step", "pool",
                            "dt_exact"});
    acfg.l2_cut = get_double_or(*method_obj, "method", "l2_cut", acfg.l2_cut);
    acfg.xi = get_double_or(*method_obj, "method", "xi", acfg.xi);
    acfg.dtheta_max = get_double_or(*method_obj, "method", "dtheta_max", acfg.dtheta_max);
    acfg.dt_max = get_double_or(*method_obj, "method", "dt_max", acfg.dt_max);
    acfg.improvement_floor =
        get_double_or(*method_obj, "method", "improvement_floor", acfg.improvement_floor);
    acfg.max_adds_per_step =
        get_int_or(*method_obj, "method", "max_adds_per_step", acfg.max_adds_per_step);
    if (acfg.l2_cut <= 0.0) throw ConfigError("method.l2_cut", "must be positive");
    if (acfg.xi <= 0.0) throw ConfigError("method.xi", "must be positive");
    if (acfg.dtheta_max <= 0.0) throw ConfigError("method.dtheta_max", "must be positive");
    if (acfg.dt_max <= 0.0) throw ConfigError("method.dt_max", "must be positive");
    if (acfg.improvement_floor < 0.0)
      throw ConfigError("method.improvement_floor", "must be >= 0");
    if (acfg.max_adds_per_step != -1 && acfg.max_adds_per_step < 1)
      throw ConfigError("method.max_adds_per_step", "expected -1 or a positive count");
    const std::string pool_name =
        find_key(*method_obj, "pool")
            ? get_string(*method_obj, "method", "pool")
            : "hamiltonian";
    if (pool_name == "hamiltonian")
      pool = PoolKind::kHamiltonian;
    else if (pool_name == "two_local")
      pool = PoolKind::kTwoLocal;
    else
      throw ConfigError("method.pool", "expected hamiltonian or two_local");
    nmethod["l2_cut"] = acfg.l2_cut;
    nmethod["xi"] = acfg.xi;
    nmethod["dtheta_max"] = acfg.dtheta_max;
    nmethod["dt_max"] = acfg.dt_max;
    nmethod["improvement_floor"] = acfg.improvement_floor;
    nmethod["max_adds_per_step"] = acfg.max_adds_per_step;
    nmethod["pool"] = pool_name;
  } else if (method_name == "trotter" || method_name == "exact") {
    detail::reject_unknown(*method_obj, "method", {"type", "dt", "dt_exact"});
    method = method_name == "trotter" ? MethodKind::kTrotter : MethodKind::kExact;
    mesh_dt = get_double_or(*method_obj, "method", "dt",
                            method == MethodKind::kTrotter ? 5e-3 : 5e-4);
    if (mesh_dt <= 0.0) throw ConfigError("method.dt", "must be positive");
    nmethod["dt"] = mesh_dt;
  } else {
    throw ConfigError("method.type", "expected avqds, trotter, or exact");
  }
  const double dt_exact = get_double_or(*method_obj, "method", "dt_exact", 5e-4);
  if (dt_exact <= 0.0) throw ConfigError("method.dt_exact", "must be positive");
  nmethod["dt_exact"] = dt_exact;

  const auto* init_obj = find_key(j, "initial_state");
  if (!init_obj) throw ConfigError("initial_state", "missing section");
  detail::require_object(*init_obj, "initial_state");
  const std::string init_type = get_string(*init_obj, "initial_state", "type");
  nlohmann::json ninit;
  ninit["type"] = init_type;
  std::optional<Ansatz> initial;
  if (init_type == "product") {
    detail::reject_unknown(*init_obj, "initial_state", {"type", "bits"});
    const auto bits = detail::get_bits_or_zeros(*init_obj, "initial_state", "bits", n);
    ninit["bits"] = bits;
    initial.emplace(product_state(n, bits));
  } else if (init_type == "dense_ground") {
    detail::reject_unknown(*init_obj, "initial_state", {"type"});
    if (n > kMaxDenseQubits)
      throw ConfigError("initial_state.type",
                        "dense_ground caps at " + std::to_string(kMaxDenseQubits) +
                            " sites");
    initial.emplace(ground_state(schedule->preparation()).state);
  } else if (init_type == "adapt_vqe") {
    detail::reject_unknown(*init_obj, "initial_state",
                           {"type", "pool", "grad_tol", "energy_tol", "max_operators"});
    const std::string pool_name =
        find_key(*init_obj, "pool") ? get_string(*init_obj, "initial_state", "pool")
                                    : "two_local";
    if (pool_name != "two_local" && pool_name != "hamiltonian")
      throw ConfigError("initial_state.pool", "expected two_local or hamiltonian");
    VqeConfig vcfg;
    vcfg.grad_tol = get_double_or(*init_obj, "initial_state", "grad_tol", vcfg.grad_tol);
    vcfg.energy_tol =
        get_double_or(*init_obj, "initial_state", "energy_tol", vcfg.energy_tol);
    vcfg.max_operators =
        get_int_or(*init_obj, "initial_state", "max_operators", vcfg.max_operators);
    if (vcfg.grad_tol <= 0.0)
      throw ConfigError("initial_state.grad_tol", "must be positive");
    if (vcfg.energy_tol <= 0.0)
      throw ConfigError("initial_state.energy_tol", "must be positive");
    if (vcfg.max_operators < 1)
      throw ConfigError("initial_state.max_operators", "must be positive");
    ninit["pool"] = pool_name;
    ninit["grad_tol"] = vcfg.grad_tol;
    ninit["energy_tol"] = vcfg.energy_tol;
    ninit["max_operators"] = vcfg.max_operators;
    const PauliSum prep = schedule->preparation();
    const std::vector<PauliString> vpool = pool_name == "two_local"
                                               ? two_local_pool(n)
                                               : hamiltonian_pool(prep);
    VqeResult res = prepare_ground_state(prep, zero_state(n), vpool, vcfg);
    if (!res.converged) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "initial_state: ground-state search stalled with pool "
                    "gradient %.3e above %.3e after %d operators",
                    res.pool_grad_max, vcfg.grad_tol, res.operators_added);
      throw std::runtime_error(msg);
    }
    initial = std::move(res.ansatz);
  } else if (init_type == "ansatz_file") {
    detail::reject_unknown(*init_obj, "initial_state",
                           {"type", "path", "reference_bits"});
    const std::string path = get_string(*init_obj, "initial_state", "path");
    const auto bits =
        detail::get_bits_or_zeros(*init_obj, "initial_state", "reference_bits", n);
    ninit["path"] = path;
    ninit["reference_bits"] = bits;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("initial_state.path", "cannot read '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    initial.emplace(ansatz_from_json(text, product_state(n, bits)));
  } else {
    throw ConfigError("initial_state.type",
                      "expected product, dense_ground, adapt_vqe, or ansatz_file");
  }

  std::vector<std::string> observables;
  const auto* obs_arr = find_key(j, "observables");
  if (obs_arr) {
    if (!obs_arr->is_array())
      throw ConfigError("observables", "expected an array of names");
    for (std::size_t k = 0; k < obs_arr->size(); ++k) {
      const std::string path = "observables[" + std::to_string(k) + "]";
      const auto& e = (*obs_arr)[k];
      if (!e.is_string()) throw ConfigError(path, "expected a string");
      const std::string name = e.get<std::string>();
      detail::validate_observable(name, n, path);
      if (std::find(observables.begin(), observables.end(), name) !=
          observables.end())
        throw ConfigError(path, "duplicate observable '" + name + "'");
      observables.push_back(name);
    }
  }

  std::vector<double> snapshot_times;
  bool write_states = true;
  const auto* out_obj = find_key(j, "output");
  if (out_obj) {
    detail::require_object(*out_obj, "output");
    detail::reject_unknown(*out_obj, "output", {"snapshot_times", "write_states"});
    write_states = get_bool_or(*out_obj, "output", "write_states", true);
    const auto* st = find_key(*out_obj, "snapshot_times");
    if (st) {
      if (!st->is_array())
        throw ConfigError("output.snapshot_times", "expected an array of times");
      for (const auto& e : *st) {
        if (!e.is_number())
          throw ConfigError("output.snapshot_times", "expected a number");
        const double tau = e.get<double>();
        if (tau < 0.0 || tau > t_final)
          throw ConfigError("output.snapshot_times",
                            "times must lie within [0, t_final]");
        snapshot_times.push_back(tau);
      }
      std::sort(snapshot_times.begin(), snapshot_times.end());
      snapshot_times.erase(
          std::unique(snapshot_times.begin(), snapshot_times.end()),
          snapshot_times.end());
    }
  }
  nlohmann::json noutput;
  noutput["snapshot_times"] = snapshot_times;
  noutput["write_states"] = write_states;

  nlohmann::json norm;
  norm["model"] = std::move(nmodel);
  norm["schedule"] = std::move(nsched);
  norm["t_final"] = t_final;
  norm["method"] = std::move(nmethod);
  norm["initial_state"] = std::move(ninit);
  norm["observables"] = observables;
  norm["output"] = std::move(noutput);

  return ResolvedExperiment{std::move(norm),
                            std::move(*schedule),
                            t_final,
                            method,
                            acfg,
                            pool,
                            mesh_dt,
                            dt_exact,
                            std::move(*initial),
                            std::move(observables),
                            std::move(snapshot_times),
                            write_states};
}

// ---------------------------------------------------------------------------
// output files

namespace detail {

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "'");
    out << text;
    if (!out.good()) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

inline std::string snapshot_tag(double tau) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", tau);
  return buf;
}

}  // namespace detail

inline std::string state_to_json(const StateVector& s, double t) {
  char buf[96];
  std::string out =
      "{\n  \"n_qubits\": " + std::to_string(s.n_qubits) + ",\n  \"t\": ";
  std::snprintf(buf, sizeof buf, "%.17g", t);
  out += buf;
  out += ",\n  \"amps\": [";
  for (Eigen::Index k = 0; k < s.amps.size(); ++k) {
    std::snprintf(buf, sizeof buf, "[%.17g, %.17g]", s.amps(k).real(),
                  s.amps(k).imag());
    out += k == 0 ? "\n    " : ",\n    ";
    out += buf;
  }
  out += s.amps.size() == 0 ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

struct StateSnapshot {
  StateVector state;
  double t = 0.0;
};

inline StateSnapshot state_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("state JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n_qubits") || !j.contains("t") ||
      !j.contains("amps"))
    throw std::invalid_argument("state JSON: need n_qubits, t, and amps");
  if (!j["n_qubits"].is_number_integer() || !j["t"].is_number() ||
      !j["amps"].is_array())
    throw std::invalid_argument("state JSON: wrong field types");
  StateSnapshot snap;
  snap.state.n_qubits = j["n_qubits"].get<int>();
  snap.t = j["t"].get<double>();
  const auto& amps = j["amps"];
  if (snap.state.n_qubits < 1 || snap.state.n_qubits > kMaxStateQubits ||
      amps.size() != (std::size_t{1} << snap.state.n_qubits))
    throw std::invalid_argument("state JSON: amplitude count mismatch");
  snap.state.amps.resize(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const auto& e = amps[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw std::invalid_argument("state JSON: amplitudes are [re, im] pairs");
    snap.state.amps(static_cast<Eigen::Index>(k)) =
        complex(e[0].get<double>(), e[1].get<double>());
  }
  return snap;
}

// per-row callback evaluating the requested observable columns
inline ObservableFn make_observable_fn(const ResolvedExperiment& ex,
                                       const std::shared_ptr<ExactReference>& ref,
                                       const StateVector& psi0) {
  if (ex.observables.empty()) return nullptr;
  const Schedule schedule = ex.schedule;
  const std::vector<std::string> names = ex.observables;
  const int n = schedule.n_qubits();
  return [schedule, names, ref, psi0, n](double t, const StateVector& s) {
    std::map<std::string, double> row;
    std::optional<double> fid;
    for (const auto& name : names) {
      if (name == "energy") {
        row[name] = expectation(schedule.hamiltonian_at(t), s);
      } else if (name == "loschmidt") {
        row[name] = loschmidt_echo(psi0, s);
      } else if (name == "fidelity" || name == "infidelity") {
        if (!fid) fid = state_fidelity(ref->state_at(t), s);
        row[name] = name == "fidelity" ? *fid : 1.0 - *fid;
      } else {
        const auto spec = detail::parse_correlator(name, n, name);
        // spin-1/2 operators: S^a_i S^a_j = sigma^a_i sigma^a_j / 4
        row[name] = 0.25 * pauli_correlator(s, spec->axis, spec->i, spec->j);
      }
    }
    return row;
  };
}

struct RunSummary {
  long rows = 0;
  long stall_events = 0;       // records where the pool could not reach the cut
  double first_stall_t = -1.0; // negative: never stalled
  long final_n_theta = 0;      // variational runs only
  long final_n_cx = 0;
  long final_two_qubit = 0;
  double wall_seconds = 0.0;
};

inline RunSummary run_experiment(const ResolvedExperiment& ex,
                                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto clock_start = std::chrono::steady_clock::now();

  const StateVector psi0 = ex.initial.evaluate();
  const bool wants_reference =
      std::find(ex.observables.begin(), ex.observables.end(), "fidelity") !=
          ex.observables.end() ||
      std::find(ex.observables.begin(), ex.observables.end(), "infidelity") !=
          ex.observables.end();
  std::shared_ptr<ExactReference> ref;
  if (wants_reference)
    ref = std::make_shared<ExactReference>(ex.schedule, psi0, ex.dt_exact);
  const ObservableFn base = make_observable_fn(ex, ref, psi0);

  const auto& snaps = ex.snapshot_times;
  std::vector<StateVector> snap_state(snaps.size());
  std::vector<double> snap_time(snaps.size(), 0.0);
  std::vector<char> snap_ok(snaps.size(), 0);
  std::size_t next_snap = 0;
  const ObservableFn observe = [&](double t, const StateVector& s) {
    while (next_snap < snaps.size() && t >= snaps[next_snap] - 1e-9) {
      snap_state[next_snap] = s;
      snap_time[next_snap] = t;
      snap_ok[next_snap] = 1;
      ++next_snap;
    }
    return base ? base(t, s) : std::map<std::string, double>{};
  };

  RunSummary sum;
  std::string csv = "t";
  for (const auto& name : ex.observables) csv += "," + name;
  if (ex.method == MethodKind::kAvqds)
    csv += ",n_theta,n_cx,L2,dt";
  else if (ex.method == MethodKind::kTrotter)
    csv += ",n_cx,dt";
  else
    csv += ",dt";
  csv += "\n";

  if (ex.method == MethodKind::kAvqds) {
    const std::vector<PauliString> pool =
        ex.pool == PoolKind::kTwoLocal
            ? two_local_pool(ex.schedule.n_qubits())
            : hamiltonian_pool(ex.schedule.structural());
    AvqdsResult res =
        run_avqds(ex.schedule, ex.initial, pool, ex.avqds, ex.t_final, observe, snaps);
    for (const auto& rec : res.records) {
      csv += detail::csv_double(rec.t);
      for (const auto& name : ex.observables)
        csv += "," + detail::csv_double(rec.observables.at(name));
      csv += "," + std::to_string(rec.n_theta) + "," + std::to_string(rec.n_cx) +
             "," + detail::csv_double(rec.l2) + "," +
             detail::csv_double(rec.dt_used) + "\n";
      if (rec.stalled) {
        ++sum.stall_events;
        if (sum.first_stall_t < 0.0) sum.first_stall_t = rec.t;
      }
    }
    sum.rows = static_cast<long>(res.records.size());
    sum.final_n_theta = static_cast<long>(res.ansatz.size());
    sum.final_n_cx = res.ansatz.cnot_count();
    sum.final_two_qubit = res.ansatz.two_qubit_rotation_count();

    // the step clipping lands a record exactly on every snapshot time, and
    // generators are only appended, so each snapshot circuit is a prefix
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      const TrajectoryRecord* at = nullptr;
      for (const auto& rec : res.records)
        if (rec.t >= snaps[k] - 1e-9) {
          at = &rec;
          break;
        }
      if (!at) continue;
      Ansatz circuit(ex.initial.reference());
      for (long m = 0; m < at->n_theta; ++m)
        circuit.append(res.ansatz.generator(static_cast<std::size_t>(m)),
                       at->thetas[static_cast<std::size_t>(m)]);
      detail::write_text_atomic(
          out_dir / ("ansatz_t" + detail::snapshot_tag(snaps[k]) + ".json"),
          ansatz_to_json(circuit));
    }
  } else {
    const std::vector<EvolutionRecord> recs =
        ex.method == MethodKind::kTrotter
            ? run_trotter(ex.schedule, psi0, ex.t_final, ex.mesh_dt, observe)
            : run_exact(ex.schedule, psi0, ex.t_final, ex.mesh_dt, observe);
    double prev_t = 0.0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const auto& rec = recs[k];
      csv += detail::csv_double(rec.t);
      for (const auto& name : ex.observables)
        csv += "," + detail::csv_double(rec.observables.at(name));
      if (ex.method == MethodKind::kTrotter)
        csv += "," + std::to_string(rec.n_cx_total);
      csv += "," + detail::csv_double(k == 0 ? 0.0 : rec.t - prev_t) + "\n";
      prev_t = rec.t;
    }
    sum.rows = static_cast<long>(recs.size());
    if (ex.method == MethodKind::kTrotter && !recs.empty())
      sum.final_n_cx = recs.back().n_cx_total;
  }

  if (ex.write_states)
    for (std::size_t k = 0; k < snaps.size(); ++k)
      if (snap_ok[k])
        detail::write_text_atomic(
            out_dir / ("state_t" + detail::snapshot_tag(snaps[k]) + ".json"),
            state_to_json(snap_state[k], snap_time[k]));

  detail::write_text_atomic(out_dir / "trajectory.csv", csv);

  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start)
          .count();
  nlohmann::json meta;
  meta["command"] = "run";
  meta["version"] = kVersion;
  meta["config"] = ex.normalized;
  meta["rows"] = sum.rows;
  meta["stall_events"] = sum.stall_events;
  meta["first_stall_t"] =
      sum.first_stall_t < 0.0 ? nlohmann::json() : nlohmann::json(sum.first_stall_t);
  meta["wall_time_seconds"] = sum.wall_seconds;
  detail::write_text_atomic(out_dir / "metadata.json", meta.dump(2) + "\n");
  return sum;
}

// ---------------------------------------------------------------------------
// comparing two run directories

namespace detail {

struct RunTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column

  const std::vector<double>* column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k] == name) return &data[k];
    return nullptr;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline RunTable read_trajectory_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty trajectory file '" + file.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  RunTable table;
  table.columns = split_csv_line(line);
  table.data.resize(table.columns.size());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.columns.size())
      throw std::runtime_error("ragged row in '" + file.string() + "'");
    for (std::size_t k = 0; k < fields.size(); ++k) {
      char* end = nullptr;
      const double v = std::strtod(fields[k].c_str(), &end);
      if (end == fields[k].c_str())
        throw std::runtime_error("non-numeric field in '" + file.string() + "'");
      table.data[k].push_back(v);
    }
  }
  return table;
}

inline bool is_bookkeeping_column(const std::string& name) {
  return name == "t" || name == "n_theta" || name == "n_cx" || name == "L2" ||
         name == "dt";
}

// state_t<tag>.json files present in a run directory, tag parsed back to time
inline std::vector<std::pair<double, std::string>> list_state_files(
    const std::filesystem::path& dir) {
  std::vector<std::pair<double, std::string>> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("state_t", 0) != 0 || name.size() <= 12 ||
        name.substr(name.size() - 5) != ".json")
      continue;
    const std::string tag = name.substr(7, name.size() - 12);
    char* end = nullptr;
    const double t = std::strtod(tag.c_str(), &end);
    if (end == tag.c_str() || *end != '\0') continue;
    out.emplace_back(t, name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

struct ColumnDeviation {
  std::string name;
  double s = 0.0;  // trajectory standard deviation against the reference
};

struct CompareReport {
  std::vector<ColumnDeviation> columns;
  bool has_gates = false;
  double n_cx_a = 0.0;
  double n_cx_b = 0.0;
  bool has_gate_ratio = false;
  double gate_ratio_b_over_a = 0.0;
  bool has_state = false;
  double state_t = 0.0;
  double state_fidelity_ab = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = "compare";
    j["version"] = kVersion;
    j["columns"] = nlohmann::json::array();
    for (const auto& c : columns)
      j["columns"].push_back({{"name", c.name}, {"s", c.s}});
    if (has_gates) {
      j["n_cx_final"] = {{"a", n_cx_a}, {"b", n_cx_b}};
      j["n_cx_final"]["ratio_b_over_a"] =
          has_gate_ratio ? nlohmann::json(gate_ratio_b_over_a) : nlohmann::json();
    } else {
      j["n_cx_final"] = nlohmann::json();
    }
    if (has_state)
      j["final_state"] = {{"t", state_t}, {"fidelity", state_fidelity_ab}};
    else
      j["final_state"] = nlohmann::json();
    return j;
  }
};

// dir_a holds the test run, dir_b the reference run
inline CompareReport compare_runs(const std::filesystem::path& dir_a,
                                  const std::filesystem::path& dir_b) {
  const detail::RunTable a = detail::read_trajectory_csv(dir_a / "trajectory.csv");
  const detail::RunTable b = detail::read_trajectory_csv(dir_b / "trajectory.csv");
  const auto* ta = a.column("t");
  const auto* tb = b.column("t");
  if (!ta || !tb) throw std::runtime_error("compare: a run lacks the t column");

  CompareReport report;
  for (const auto& name : a.columns) {
    if (detail::is_bookkeeping_column(name)) continue;
    const auto* va = a.column(name);
    const auto* vb = b.column(name);
    if (!vb) continue;
    report.columns.push_back({name, trajectory_std(*ta, *va, *tb, *vb)});
  }
  if (report.columns.empty())
    throw std::invalid_argument("compare: the runs share no observable columns");

  const auto* ca = a.column("n_cx");
  const auto* cb = b.column("n_cx");
  if (ca && cb && !ca->empty() && !cb->empty()) {
    report.has_gates = true;
    report.n_cx_a = ca->back();
    report.n_cx_b = cb->back();
    if (report.n_cx_a > 0.0) {
      report.has_gate_ratio = true;
      report.gate_ratio_b_over_a = report.n_cx_b / report.n_cx_a;
    }
  }

  const auto states_a = detail::list_state_files(dir_a);
  const auto states_b = detail::list_state_files(dir_b);
  for (auto it = states_a.rbegin(); it != states_a.rend() && !report.has_state;
       ++it) {
    for (const auto& [tb_state, name_b] : states_b) {
      (void)tb_state;
      if (name_b != it->second) continue;
      std::ifstream fa(dir_a / it->second, std::ios::binary);
      std::ifstream fb(dir_b / name_b, std::ios::binary);
      if (!fa || !fb) continue;
      const std::string text_a((std::istreambuf_iterator<char>(fa)),
                               std::istreambuf_iterator<char>());
      const std::string text_b((std::istreambuf_iterator<char>(fb)),
                               std::istreambuf_iterator<char>());
      const StateSnapshot sa = state_from_json(text_a);
      const StateSnapshot sb = state_from_json(text_b);
      if (sa.state.n_qubits != sb.state.n_qubits) continue;
      report.has_state = true;
      report.state_t = it->first;
      report.state_fidelity_ab = state_fidelity(sa.state, sb.state);
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// system-size sweeps and resource-scaling fits

struct PowerFit {
  double amplitude = 0.0;  // y ~ amplitude * n^exponent
  double exponent = 0.0;
  double rms_rel = 0.0;
};

struct QuadraticFit {
  double coefficient = 0.0;  // y ~ coefficient * n^2
  double rms_rel = 0.0;
};

struct ExponentialFit {
  double coefficient = 0.0;  // y ~ coefficient * (e^{n / beta} - 1)
  double beta = 0.0;
  double rms_rel = 0.0;
};

namespace detail {

inline void check_fit_inputs(const std::vector<double>& x,
                             const std::vector<double>& y, const char* who) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument(std::string(who) + ": need two paired samples");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] <= 0.0 || y[k] <= 0.0)
      throw std::invalid_argument(std::string(who) + ": samples must be positive");
}

inline double rms_relative_residual(const std::vector<double>& y,
                                    const std::vector<double>& fit) {
  double acc = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double r = (fit[k] - y[k]) / y[k];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

}  // namespace detail

inline PowerFit fit_power_law(const std::vector<double>& x,
                              const std::vector<double>& y) {
  detail::check_fit_inputs(x, y, "fit_power_law");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw std::invalid_argument("fit_power_law: degenerate abscissa");
  PowerFit fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.amplitude = std::exp((sy - fit.exponent * sx) / n);
  std::vector<double> model(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    model[k] = fit.amplitude * std::pow(x[k], fit.exponent);
  fit.rms_rel = detail::rms_relative_residual(y, model);
  return fit;
}

inline QuadraticFit fit_quadratic_coefficient(const std::vector<double>& x,
                                              const std::vector<double>& y) {
  detail::check_fit_inputs(x, y, "fit_quadratic_coefficient");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x2 = x[k] * x[k];
    num += y[k] * x2;
    den += x2 * x2;
  }
  QuadraticFit fit;
  fit.coefficient = num / den;
  std::vector<double> model(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    model[k] = fit.coefficient * x[k] * x[k];
  fit.rms_rel = detail::rms_relative_residual(y, model);
  return fit;
}

inline ExponentialFit fit_exponential_minus_one(const std::vector<double>& x,
                                                const std::vector<double>& y) {
  detail::check_fit_inputs(x, y, "fit_exponential_minus_one");
  const auto sse_at = [&](double beta, double& b_out) {
    double sfy = 0.0, sff = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double f = std::expm1(x[k] / beta);
      sfy += f * y[k];
      sff += f * f;
    }
    b_out = sff > 0.0 ? sfy / sff : 0.0;
    double sse = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = b_out * std::expm1(x[k] / beta) - y[k];
      sse += r * r;
    }
    return sse;
  };

  ExponentialFit best;
  double best_sse = std::numeric_limits<double>::infinity();
  const auto consider = [&](double beta) {
    double b = 0.0;
    const double sse = sse_at(beta, b);
    if (sse < best_sse) {
      best_sse = sse;
      best.beta = beta;
      best.coefficient = b;
    }
  };
  const double lo = 0.2, hi = 50.0;
  const int coarse = 400;
  for (int k = 0; k < coarse; ++k)
    consider(lo * std::pow(hi / lo, static_cast<double>(k) / (coarse - 1)));
  const double ratio = std::pow(hi / lo, 1.0 / (coarse - 1));
  const double rlo = std::max(lo, best.beta / ratio);
  const double rhi = std::min(hi, best.beta * ratio);
  for (int k = 0; k <= 200; ++k)
    consider(rlo + (rhi - rlo) * static_cast<double>(k) / 200.0);

  std::vector<double> model(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    model[k] = best.coefficient * std::expm1(x[k] / best.beta);
  best.rms_rel = detail::rms_relative_residual(y, model);
  return best;
}

struct SweepGrid {
  int from = 0;
  int to = 0;
  int step = 1;
};

// "n=<from>:<to>" or "n=<from>:<to>:<step>"
inline SweepGrid parse_grid(const std::string& spec) {
  const auto fail = [] {
    throw std::invalid_argument("grid: expected n=<from>:<to>[:<step>]");
  };
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || spec.substr(0, eq) != "n") fail();
  std::vector<std::string> parts;
  std::size_t start = eq + 1;
  for (;;) {
    const std::size_t colon = spec.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) fail();
  for (const auto& p : parts)
    if (!detail::all_digits(p)) fail();
  SweepGrid grid;
  grid.from = std::atoi(parts[0].c_str());
  grid.to = std::atoi(parts[1].c_str());
  grid.step = parts.size() == 3 ? std::atoi(parts[2].c_str()) : 1;
  if (grid.from < 1 || grid.to < grid.from || grid.step < 1) fail();
  return grid;
}

struct SweepPoint {
  int n = 0;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

struct SeriesFits {
  bool fitted = false;
  PowerFit power;
  QuadraticFit quadratic;
  ExponentialFit exponential;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<SweepPoint> points;
  std::map<std::string, SeriesFits> fits;  // n_theta, n_two_qubit, n_cx
};

inline SweepResult run_sweep(const nlohmann::json& tmpl, const SweepGrid& grid,
                             const std::filesystem::path& out_dir,
                             int threads = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<int> sizes;
  for (int v = grid.from; v <= grid.to; v += grid.step) sizes.push_back(v);

  std::vector<SweepPoint> points(sizes.size());
  const auto run_point = [&](std::size_t idx) {
    SweepPoint& p = points[idx];
    p.n = sizes[idx];
    try {
      nlohmann::json cfg = tmpl;
      if (!cfg.is_object() || !cfg.contains("model") || !cfg["model"].is_object())
        throw ConfigError("model", "missing section");
      cfg["model"]["n"] = p.n;
      const ResolvedExperiment ex = resolve_experiment(cfg);
      char name[32];
      std::snprintf(name, sizeof name, "point_n%d", p.n);
      p.summary = run_experiment(ex, out_dir / name);
      p.ok = true;
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
    }
  };
  if (threads <= 1 || sizes.size() <= 1) {
    for (std::size_t k = 0; k < sizes.size(); ++k) run_point(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), sizes.size());
    for (std::size_t w = 0; w < n_workers; ++w)
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= sizes.size()) return;
          run_point(idx);
        }
      });
    for (auto& w : workers) w.join();
  }

  std::string csv = "n,n_theta,n_two_qubit,n_cx,stalls\n";
  for (const auto& p : points) {
    if (!p.ok) continue;
    csv += std::to_string(p.n) + "," + std::to_string(p.summary.final_n_theta) +
           "," + std::to_string(p.summary.final_two_qubit) + "," +
           std::to_string(p.summary.final_n_cx) + "," +
           std::to_string(p.summary.stall_events) + "\n";
  }
  detail::write_text_atomic(out_dir / "sweep.csv", csv);

  SweepResult result{grid, std::move(points), {}};
  const std::pair<const char*, long RunSummary::*> series[] = {
      {"n_theta", &RunSummary::final_n_theta},
      {"n_two_qubit", &RunSummary::final_two_qubit},
      {"n_cx", &RunSummary::final_n_cx},
  };
  for (const auto& [name, member] : series) {
    std::vector<double> xs, ys;
    for (const auto& p : result.points)
      if (p.ok && p.summary.*member > 0) {
        xs.push_back(static_cast<double>(p.n));
        ys.push_back(static_cast<double>(p.summary.*member));
      }
    SeriesFits fits;
    if (xs.size() >= 3) {
      fits.fitted = true;
      fits.power = fit_power_law(xs, ys);
      fits.quadratic = fit_quadratic_coefficient(xs, ys);
      fits.exponential = fit_exponential_minus_one(xs, ys);
    }
    result.fits[name] = fits;
  }

  nlohmann::json j;
  j["command"] = "sweep";
  j["version"] = kVersion;
  j["grid"] = {{"from", grid.from}, {"to", grid.to}, {"step", grid.step}};
  j["points"] = nlohmann::json::array();
  for (const auto& p : result.points) {
    if (p.ok)
      j["points"].push_back({{"n", p.n},
                             {"n_theta", p.summary.final_n_theta},
                             {"n_two_qubit", p.summary.final_two_qubit},
                             {"n_cx", p.summary.final_n_cx},
                             {"stalls", p.summary.stall_events}});
    else
      j["points"].push_back({{"n", p.n}, {"error", p.error}});
  }
  j["fits"] = nlohmann::json::object();
  for (const auto& [name, fits] : result.fits) {
    if (!fits.fitted) {
      j["fits"][name] = nlohmann::json();
      continue;
    }
    j["fits"][name] = {
        {"power",
         {{"amplitude", fits.power.amplitude},
          {"exponent", fits.power.exponent},
          {"rms_rel_residual", fits.power.rms_rel}}},
        {"quadratic",
         {{"coefficient", fits.quadratic.coefficient},
          {"rms_rel_residual", fits.quadratic.rms_rel}}},
        {"exponential",
         {{"coefficient", fits.exponential.coefficient},
          {"beta", fits.exponential.beta},
          {"rms_rel_residual", fits.exponential.rms_rel}}},
    };
  }
  detail::write_text_atomic(out_dir / "sweep_fits.json", j.dump(2) + "\n");
  return result;
}

}  // namespace avqds
