#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "avqds/pauli.hpp"

namespace avqds {

// Basis convention: amplitude index k encodes site j in bit j (site 0 is the
// least significant bit); |0> at a site is the Z = +1 eigenstate.
struct StateVector {
  int n_qubits = 0;
  Eigen::VectorXcd amps;

  std::int64_t dim() const { return amps.size(); }
};

inline constexpr int kMaxStateQubits = 24;

inline StateVector product_state(int n_qubits, const std::vector<int>& bits) {
  if (n_qubits < 1 || n_qubits > kMaxStateQubits)
    throw std::invalid_argument("product_state: n_qubits out of range");
  if (static_cast<int>(bits.size()) != n_qubits)
    throw std::invalid_argument("product_state: bits size must equal n_qubits");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amps = Eigen::VectorXcd::Zero(std::int64_t{1} << n_qubits);
  std::int64_t k = 0;
  for (int j = 0; j < n_qubits; ++j) {
    if (bits[j] != 0 && bits[j] != 1)
      throw std::invalid_argument("product_state: bits must be 0 or 1");
    k |= std::int64_t{bits[j]} << j;  // site 0 is the least significant bit
  }
  s.amps[k] = 1.0;
  return s;
}

// |0...0>
inline StateVector zero_state(int n_qubits) {
  return product_state(n_qubits, std::vector<int>(n_qubits, 0));
}

inline complex inner(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("inner: qubit counts differ");
  return a.amps.dot(b.amps);  // Eigen dot conjugates the left argument
}

namespace detail {

inline complex i_power(int k) { return phase_from_exponent(k); }

// amplitude factor of P acting on basis |k>:  P|k> = factor(k) |k ^ x>
// with factor(k) = i^q * (-1)^{popcount(k & z)}, q = phase_exp + #Y.
inline complex pauli_front_phase(const PauliString& p) {
  const int q = p.phase_exponent() +
                std::popcount(p.x_mask() & p.z_mask());
  return i_power(q);
}

inline double parity_sign(std::uint64_t v) {
  return (std::popcount(v) & 1) ? -1.0 : 1.0;
}

}  // namespace detail

inline void apply_pauli_inplace(const PauliString& p,
                                Eigen::Ref<Eigen::VectorXcd> v) {
  const std::uint64_t x = p.x_mask();
  const std::uint64_t z = p.z_mask();
  const complex front = detail::pauli_front_phase(p);
  const std::int64_t dim = v.size();
  if (x == 0) {
    for (std::int64_t k = 0; k < dim; ++k)
      v[k] *= front * detail::parity_sign(k & z);
    return;
  }
  const std::uint64_t hb = std::uint64_t{1} << (63 - std::countl_zero(x));
  for (std::int64_t base = 0; base < dim; base += static_cast<std::int64_t>(2 * hb)) {
    for (std::uint64_t off = 0; off < hb; ++off) {
      const std::int64_t k = base + static_cast<std::int64_t>(off);
      const std::int64_t j = k ^ static_cast<std::int64_t>(x);
      const complex fk = front * detail::parity_sign(k & z);
      const complex fj = front * detail::parity_sign(j & z);
      const complex ak = v[k];
      v[k] = fj * v[j];
      v[j] = fk * ak;
    }
  }
}

inline StateVector apply_pauli(const PauliString& p, StateVector s) {
  if (p.n_qubits() != s.n_qubits)
    throw std::invalid_argument("apply_pauli: qubit counts differ");
  apply_pauli_inplace(p, s.amps);
  return s;
}

// exp(-i theta g) v = cos(theta) v - i sin(theta) g v, valid because a
// phase-free Pauli string squares to the identity.
inline void apply_pauli_rotation_inplace(const PauliString& g, double theta,
                                         Eigen::Ref<Eigen::VectorXcd> v) {
  if (!g.is_phase_free())
    throw std::invalid_argument("apply_pauli_rotation: generator carries a phase");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const complex mis(0.0, -s);
  const std::uint64_t x = g.x_mask();
  const std::uint64_t z = g.z_mask();
  const complex front = detail::pauli_front_phase(g);
  const std::int64_t dim = v.size();
  if (x == 0) {
    const complex fplus = c + mis;
    const complex fminus = c - mis;
    for (std::int64_t k = 0; k < dim; ++k)
      v[k] *= detail::parity_sign(k & z) > 0 ? fplus : fminus;
    return;
  }
  const complex mfront = mis * front;
  const std::uint64_t hb = std::uint64_t{1} << (63 - std::countl_zero(x));
  for (std::int64_t base = 0; base < dim; base += static_cast<std::int64_t>(2 * hb)) {
    for (std::uint64_t off = 0; off < hb; ++off) {
      const std::int64_t k = base + static_cast<std::int64_t>(off);
      const std::int64_t j = k ^ static_cast<std::int64_t>(x);
      const complex gk = mfront * detail::parity_sign(k & z);
      const complex gj = mfront * detail::parity_sign(j & z);
      const complex ak = v[k];
      v[k] = c * ak + gj * v[j];
      v[j] = c * v[j] + gk * ak;
    }
  }
}

inline void apply_pauli_rotation_inplace(const PauliString& g, double theta,
                                         StateVector& s) {
  if (g.n_qubits() != s.n_qubits)
    throw std::invalid_argument("apply_pauli_rotation: qubit counts differ");
  apply_pauli_rotation_inplace(g, theta, s.amps);
}

inline Eigen::VectorXcd apply_pauli_sum(const PauliSum& h,
                                        const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  const std::int64_t dim = v.size();
  for (const auto& t : h.terms()) {
    if (t.coeff == 0.0) continue;
    const std::uint64_t x = t.str.x_mask();
    const std::uint64_t z = t.str.z_mask();
    const complex cf = t.coeff * detail::pauli_front_phase(t.str);
    if (x == 0) {
      for (std::int64_t k = 0; k < dim; ++k)
        out[k] += cf * detail::parity_sign(k & z) * v[k];
    } else {
      for (std::int64_t k = 0; k < dim; ++k)
        out[k ^ static_cast<std::int64_t>(x)] +=
            cf * detail::parity_sign(k & z) * v[k];
    }
  }
  return out;
}

inline Eigen::VectorXcd apply_pauli_sum(const PauliSum& h, const StateVector& s) {
  if (h.n_qubits() != s.n_qubits)
    throw std::invalid_argument("apply_pauli_sum: qubit counts differ");
  return apply_pauli_sum(h, s.amps);
}

inline double expectation(const PauliSum& h, const StateVector& s) {
  if (h.n_qubits() != s.n_qubits)
    throw std::invalid_argument("expectation: qubit counts differ");
  const Eigen::VectorXcd& v = s.amps;
  const std::int64_t dim = v.size();
  complex acc = 0.0;
  for (const auto& t : h.terms()) {
    if (t.coeff == 0.0) continue;
    const std::uint64_t x = t.str.x_mask();
    const std::uint64_t z = t.str.z_mask();
    const complex cf = t.coeff * detail::pauli_front_phase(t.str);
    complex term = 0.0;
    for (std::int64_t k = 0; k < dim; ++k)
      term += std::conj(v[k ^ static_cast<std::int64_t>(x)]) *
              detail::parity_sign(k & z) * v[k];
    acc += cf * term;
  }
  if (std::abs(acc.imag()) > 1e-9 * (1.0 + std::abs(acc.real())))
    throw std::runtime_error("expectation: non-real value for Hermitian sum");
  return acc.real();
}

inline double variance_from_square(const PauliSum& h_squared, double energy,
                                   const StateVector& s) {
  const double var = expectation(h_squared, s) - energy * energy;
  if (var < -1e-10)
    throw std::runtime_error("variance: negative beyond tolerance");
  return var;
}

inline double variance(const PauliSum& h, const StateVector& s) {
  return variance_from_square(square(h), expectation(h, s), s);
}

}  // namespace avqds
