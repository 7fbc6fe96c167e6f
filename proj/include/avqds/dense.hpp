#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

inline constexpr int kMaxDenseQubits = 14;

inline Eigen::MatrixXcd to_dense(const PauliString& p) {
  if (p.n_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("to_dense: dense path caps at 2^14");
  const std::int64_t dim = std::int64_t{1} << p.n_qubits();
  const std::uint64_t x = p.x_mask();
  const std::uint64_t z = p.z_mask();
  const complex front = detail::pauli_front_phase(p);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::int64_t k = 0; k < dim; ++k)
    m(k ^ static_cast<std::int64_t>(x), k) = front * detail::parity_sign(k & z);
  return m;
}

inline Eigen::MatrixXcd to_dense(const PauliSum& h) {
  if (h.n_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("to_dense: dense path caps at 2^14");
  const std::int64_t dim = std::int64_t{1} << h.n_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h.terms()) {
    const std::uint64_t x = t.str.x_mask();
    const std::uint64_t z = t.str.z_mask();
    const complex cf = t.coeff * detail::pauli_front_phase(t.str);
    for (std::int64_t k = 0; k < dim; ++k)
      m(k ^ static_cast<std::int64_t>(x), k) += cf * detail::parity_sign(k & z);
  }
  return m;
}

struct GroundState {
  StateVector state;
  double energy = 0.0;
  double gap = 0.0;        // E1 - E0
  bool degenerate = false; // gap below 1e-10; returned state is one member
};

inline GroundState ground_state(const PauliSum& h) {
  const Eigen::MatrixXcd hm = to_dense(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ground_state: eigensolver failed");
  GroundState g;
  g.state.n_qubits = h.n_qubits();
  g.state.amps = es.eigenvectors().col(0);
  g.energy = es.eigenvalues()(0);
  g.gap = es.eigenvalues().size() > 1 ? es.eigenvalues()(1) - g.energy : 0.0;
  g.degenerate = g.gap < 1e-10;
  return g;
}

}  // namespace avqds
