#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avqds/pauli.hpp"

namespace avqds {

namespace detail {

inline PauliString two_site(int n, int i, int j, char a, char b) {
  PauliString p(n);
  p.set_letter(i, a);
  p.set_letter(j, b);
  return p;
}

inline PauliString one_site(int n, int i, char a) {
  PauliString p(n);
  p.set_letter(i, a);
  return p;
}

}  // namespace detail

// Open anisotropic XY chain in a longitudinal field:
//   -J sum_i [(1+gamma) X_i X_{i+1} + (1-gamma) Y_i Y_{i+1}] + h_z sum_i Z_i
// Terms appear XX bonds, then YY bonds, then Z fields; coefficients that are
// exactly zero (gamma = +-1, h_z = 0) are dropped from the canonical sum.
inline PauliSum lsm_hamiltonian(int n, double J, double gamma, double h_z) {
  if (n < 2) throw std::invalid_argument("lsm_hamiltonian: n must be >= 2");
  PauliSum h(n);
  for (int i = 0; i + 1 < n; ++i)
    h.add(-J * (1.0 + gamma), detail::two_site(n, i, i + 1, 'X', 'X'));
  for (int i = 0; i + 1 < n; ++i)
    h.add(-J * (1.0 - gamma), detail::two_site(n, i, i + 1, 'Y', 'Y'));
  for (int i = 0; i < n; ++i)
    h.add(h_z, detail::one_site(n, i, 'Z'));
  h.compress();
  return h;
}

// Mixed-field Ising model:
//   -J sum_i Z_i Z_{i+1} + sum_i (h_x X_i + h_z Z_i)
// with Z_n = Z_0 when periodic.  Zero-coefficient fields are dropped.
inline PauliSum mfim_hamiltonian(int n, double J, double h_x, double h_z,
                                 bool periodic) {
  if (n < 2) throw std::invalid_argument("mfim_hamiltonian: n must be >= 2");
  if (periodic && n == 2)
    throw std::invalid_argument(
        "mfim_hamiltonian: periodic n=2 doubles the single bond");
  PauliSum h(n);
  const int bonds = periodic ? n : n - 1;
  for (int i = 0; i < bonds; ++i)
    h.add(-J, detail::two_site(n, i, (i + 1) % n, 'Z', 'Z'));
  for (int i = 0; i < n; ++i)
    h.add(h_x, detail::one_site(n, i, 'X'));
  for (int i = 0; i < n; ++i)
    h.add(h_z, detail::one_site(n, i, 'Z'));
  h.compress();
  return h;
}

// Time-dependent Hamiltonian with a t-independent term structure.  The ramp
// keeps exactly-zero coefficients in place (uncompressed) so pools, squared
// caches, and per-step gate counts see one fixed string set.
class Schedule {
 public:
  enum class Kind { kConstant, kLsmLinearRamp, kSuddenQuench };

  static Schedule constant(PauliSum h) {
    Schedule s(Kind::kConstant, h.n_qubits());
    s.post_ = std::move(h);
    return s;
  }

  // gamma(t) = 1 - 2 t / T for t <= T, then -1
  static Schedule lsm_linear_ramp(int n, double J, double h_z, double ramp_time) {
    if (ramp_time <= 0.0)
      throw std::invalid_argument("lsm_linear_ramp: ramp time must be positive");
    Schedule s(Kind::kLsmLinearRamp, n);
    s.j_ = J;
    s.h_z_ = h_z;
    s.ramp_time_ = ramp_time;
    s.post_ = lsm_hamiltonian(n, J, 0.0, h_z);  // both bond families present
    return s;
  }

  static Schedule sudden_quench(PauliSum h_pre, PauliSum h_post) {
    if (h_pre.n_qubits() != h_post.n_qubits())
      throw std::invalid_argument("sudden_quench: qubit counts differ");
    Schedule s(Kind::kSuddenQuench, h_post.n_qubits());
    s.pre_ = std::move(h_pre);
    s.post_ = std::move(h_post);
    return s;
  }

  Kind kind() const { return kind_; }
  int n_qubits() const { return n_; }
  double ramp_time() const { return ramp_time_; }

  // fixed string set with generically nonzero coefficients; pool construction
  // and squared-sum caches key off this
  const PauliSum& structural() const { return post_; }

  // Hamiltonian whose ground state is the natural t = 0 preparation: the
  // pre-quench side for a quench, H(0) for a ramp
  PauliSum preparation() const {
    if (kind_ == Kind::kSuddenQuench) return pre_;
    if (kind_ == Kind::kLsmLinearRamp) return hamiltonian_at(0.0);
    return post_;
  }

  bool is_time_dependent() const { return kind_ == Kind::kLsmLinearRamp; }

  double lsm_gamma(double t) const {
    if (kind_ != Kind::kLsmLinearRamp)
      throw std::logic_error("lsm_gamma: not a ramp schedule");
    if (t <= 0.0) return 1.0;
    if (t >= ramp_time_) return -1.0;
    return 1.0 - 2.0 * t / ramp_time_;
  }

  PauliSum hamiltonian_at(double t) const {
    if (kind_ != Kind::kLsmLinearRamp) return post_;
    const double gamma = lsm_gamma(t);
    PauliSum h(n_);
    const auto& terms = post_.terms();
    for (const auto& term : terms) {
      double c;
      if (term.str.weight() == 2)   // XX bonds are pure-X strings, YY pure-Y
        c = term.str.z_mask() == 0 ? -j_ * (1.0 + gamma)
                                   : -j_ * (1.0 - gamma);
      else
        c = h_z_;
      h.add(c, term.str);
    }
    return h;
  }

 private:
  Schedule(Kind kind, int n) : kind_(kind), n_(n), pre_(n), post_(n) {}

  Kind kind_;
  int n_;
  double j_ = 0.0;
  double h_z_ = 0.0;
  double ramp_time_ = 0.0;
  PauliSum pre_;
  PauliSum post_;
};

}  // namespace avqds
