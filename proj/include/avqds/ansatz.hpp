#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

// Product ansatz  prod_mu exp(-i theta_mu A_mu) |reference>, with index 0
// acting first.  Generators are phase-free non-identity Pauli strings; append
// adds at the end (acts last) with theta = 0 so the represented state is
// unchanged by growth.
class Ansatz {
 public:
  explicit Ansatz(StateVector reference) : reference_(std::move(reference)) {
    if (reference_.n_qubits < 1)
      throw std::invalid_argument("Ansatz: reference state is empty");
    if (std::abs(reference_.amps.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("Ansatz: reference state is not normalized");
  }

  int n_qubits() const { return reference_.n_qubits; }
  std::size_t size() const { return generators_.size(); }
  const StateVector& reference() const { return reference_; }
  const std::vector<PauliString>& generators() const { return generators_; }
  const std::vector<double>& thetas() const { return thetas_; }

  double theta(std::size_t mu) const { return thetas_.at(mu); }
  const PauliString& generator(std::size_t mu) const { return generators_.at(mu); }

  void append(const PauliString& g, double theta = 0.0) {
    if (g.n_qubits() != n_qubits())
      throw std::invalid_argument("Ansatz::append: qubit counts differ");
    if (!g.is_phase_free())
      throw std::invalid_argument("Ansatz::append: generator carries a phase");
    if (g.is_identity())
      throw std::invalid_argument("Ansatz::append: identity generator");
    generators_.push_back(g);
    thetas_.push_back(theta);
  }

  void set_theta(std::size_t mu, double value) { thetas_.at(mu) = value; }

  void set_thetas(const std::vector<double>& values) {
    if (values.size() != thetas_.size())
      throw std::invalid_argument("Ansatz::set_thetas: size mismatch");
    thetas_ = values;
  }

  void shift_thetas(const Eigen::VectorXd& delta) {
    if (static_cast<std::size_t>(delta.size()) != thetas_.size())
      throw std::invalid_argument("Ansatz::shift_thetas: size mismatch");
    for (std::size_t mu = 0; mu < thetas_.size(); ++mu) thetas_[mu] += delta[mu];
  }

  StateVector evaluate() const {
    StateVector s = reference_;
    for (std::size_t mu = 0; mu < generators_.size(); ++mu)
      apply_pauli_rotation_inplace(generators_[mu], thetas_[mu], s.amps);
    return s;
  }

  // d|psi>/d theta_mu: suffix rotations applied to -i A_mu (prefix state);
  // the generator commutes with its own rotation.
  StateVector derivative(std::size_t mu) const {
    if (mu >= generators_.size())
      throw std::invalid_argument("Ansatz::derivative: index out of range");
    StateVector s = reference_;
    for (std::size_t nu = 0; nu <= mu; ++nu)
      apply_pauli_rotation_inplace(generators_[nu], thetas_[nu], s.amps);
    apply_pauli_inplace(generators_[mu], s.amps);
    s.amps *= complex(0.0, -1.0);
    for (std::size_t nu = mu + 1; nu < generators_.size(); ++nu)
      apply_pauli_rotation_inplace(generators_[nu], thetas_[nu], s.amps);
    return s;
  }

  // 2(weight - 1) CNOTs per rotation in the standard ladder compilation
  long cnot_count() const {
    long total = 0;
    for (const auto& g : generators_) total += 2 * (g.weight() - 1);
    return total;
  }

  int two_qubit_rotation_count() const {
    int c = 0;
    for (const auto& g : generators_)
      if (g.weight() == 2) ++c;
    return c;
  }

 private:
  StateVector reference_;
  std::vector<PauliString> generators_;
  std::vector<double> thetas_;
};

// JSON form: {"n_qubits": n, "terms": [{"pauli": "X0 X1", "theta": v}, ...]}
// with thetas as 17-significant-digit decimals so round trips are exact.
inline std::string ansatz_to_json(const Ansatz& a) {
  std::string out = "{\n  \"n_qubits\": " + std::to_string(a.n_qubits()) +
                    ",\n  \"terms\": [";
  char buf[40];
  for (std::size_t mu = 0; mu < a.size(); ++mu) {
    std::snprintf(buf, sizeof(buf), "%.16e", a.theta(mu));
    out += (mu == 0 ? "\n" : ",\n");
    out += "    {\"pauli\": \"" + format_pauli(a.generator(mu)) +
           "\", \"theta\": " + buf + "}";
  }
  out += a.size() == 0 ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline Ansatz ansatz_from_json(const std::string& text, StateVector reference) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("ansatz JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("ansatz JSON: not an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "n_qubits" && key != "terms")
      throw std::invalid_argument("ansatz JSON: unknown key '" + key + "'");
  }
  if (!j.contains("n_qubits") || !j["n_qubits"].is_number_integer())
    throw std::invalid_argument("ansatz JSON: missing integer n_qubits");
  const int n = j["n_qubits"].get<int>();
  if (n != reference.n_qubits)
    throw std::invalid_argument("ansatz JSON: n_qubits does not match reference");
  if (!j.contains("terms") || !j["terms"].is_array())
    throw std::invalid_argument("ansatz JSON: missing terms array");

  Ansatz a(std::move(reference));
  for (const auto& term : j["terms"]) {
    if (!term.is_object() || !term.contains("pauli") || !term.contains("theta"))
      throw std::invalid_argument("ansatz JSON: term needs pauli and theta");
    for (const auto& [key, value] : term.items()) {
      (void)value;
      if (key != "pauli" && key != "theta")
        throw std::invalid_argument("ansatz JSON: unknown term key '" + key + "'");
    }
    if (!term["pauli"].is_string() || !term["theta"].is_number())
      throw std::invalid_argument("ansatz JSON: term types are pauli:string, theta:number");
    a.append(parse_pauli(term["pauli"].get<std::string>(), n),
             term["theta"].get<double>());
  }
  return a;
}

}  // namespace avqds
