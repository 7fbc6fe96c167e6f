#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

// named time-series samples recorded along an evolution
using ObservableFn =
    std::function<std::map<std::string, double>(double, const StateVector&)>;

// <sigma^a_i sigma^a_j> times a configurable scale (0.25 converts bare Pauli
// correlators to the spin-1/2 S^a S^a convention)
inline double pauli_correlator(const StateVector& s, char axis, int i, int j,
                               double scale = 1.0) {
  if (axis != 'x' && axis != 'y' && axis != 'z')
    throw std::invalid_argument("pauli_correlator: axis must be x, y, or z");
  if (i == j)
    throw std::invalid_argument("pauli_correlator: sites must differ");
  const char l = static_cast<char>(axis - 'a' + 'A');
  PauliString p(s.n_qubits);
  p.set_letter(i, l);
  p.set_letter(j, l);
  PauliSum o(s.n_qubits);
  o.add(1.0, p);
  return scale * expectation(o, s);
}

inline double state_fidelity(const StateVector& a, const StateVector& b) {
  const complex ov = inner(a, b);
  return std::norm(ov);
}

inline double loschmidt_echo(const StateVector& initial, const StateVector& s) {
  return state_fidelity(initial, s);
}

inline std::size_t nearest_time_index(const std::vector<double>& times,
                                      double t) {
  if (times.empty())
    throw std::invalid_argument("nearest_time_index: empty time mesh");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

// s = sqrt( sum_k (test_k - ref(nearest t_k))^2 / (N_t - 1) ), the trajectory
// deviation between a test curve and a reference curve on its own mesh
inline double trajectory_std(const std::vector<double>& t_test,
                             const std::vector<double>& v_test,
                             const std::vector<double>& t_ref,
                             const std::vector<double>& v_ref) {
  if (t_test.size() != v_test.size() || t_ref.size() != v_ref.size())
    throw std::invalid_argument("trajectory_std: mesh/value size mismatch");
  if (t_test.size() < 2)
    throw std::invalid_argument("trajectory_std: need at least two test samples");
  if (t_ref.empty())
    throw std::invalid_argument("trajectory_std: empty reference");
  double acc = 0.0;
  for (std::size_t k = 0; k < t_test.size(); ++k) {
    const double ref = v_ref[nearest_time_index(t_ref, t_test[k])];
    const double diff = v_test[k] - ref;
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(t_test.size() - 1));
}

}  // namespace avqds
