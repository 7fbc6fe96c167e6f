#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "avqds/ansatz.hpp"
#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

// Variational tangent space at the current parameters: the state, one
// derivative column per parameter, their overlaps with the state, and the
// Hamiltonian applied to the state.  All derivative columns are produced by a
// single left-to-right sweep: rotation mu is applied to the running prefix
// and to every previously stored column, then column mu is seeded with
// -i A_mu (prefix state).
struct TangentFrame {
  StateVector psi;
  Eigen::MatrixXcd d;        // dim x n_theta derivative states
  Eigen::VectorXcd overlaps; // <d_mu | psi>
  Eigen::VectorXcd h_psi;
  double energy = 0.0;
};

// Equation-of-motion data for the regularized linear system
// (M + xi I) theta_dot = V.  The distance l2 uses the same solve, so the
// reported value matches the dynamics actually integrated.
struct McLachlanSystem {
  Eigen::MatrixXd m;
  Eigen::VectorXd v;
  double var2 = 0.0;     // 2 var(H)
  double energy = 0.0;
  double xi = 0.0;
  Eigen::VectorXd theta_dot;
  double l2 = 0.0;       // var2 - V . theta_dot
  Eigen::LLT<Eigen::MatrixXd> llt;  // factorization of m + xi I
};

inline TangentFrame compute_tangent_frame(const Ansatz& a) {
  TangentFrame f;
  const std::size_t n = a.size();
  Eigen::VectorXcd cur = a.reference().amps;
  f.d.resize(cur.size(), static_cast<Eigen::Index>(n));
  for (std::size_t mu = 0; mu < n; ++mu) {
    const PauliString& g = a.generator(mu);
    const double theta = a.theta(mu);
    apply_pauli_rotation_inplace(g, theta, cur);
    for (std::size_t nu = 0; nu < mu; ++nu)
      apply_pauli_rotation_inplace(g, theta, f.d.col(static_cast<Eigen::Index>(nu)));
    Eigen::VectorXcd col = cur;
    apply_pauli_inplace(a.generator(mu), col);
    f.d.col(static_cast<Eigen::Index>(mu)) = complex(0.0, -1.0) * col;
  }
  f.psi.n_qubits = a.n_qubits();
  f.psi.amps = std::move(cur);
  f.overlaps = f.d.adjoint() * f.psi.amps;
  return f;
}

inline void attach_hamiltonian(TangentFrame& f, const PauliSum& h) {
  f.h_psi = apply_pauli_sum(h, f.psi.amps);
  const complex e = f.psi.amps.dot(f.h_psi);
  if (std::abs(e.imag()) > 1e-9 * (1.0 + std::abs(e.real())))
    throw std::runtime_error("attach_hamiltonian: non-real energy");
  f.energy = e.real();
}

// M_{mu nu} = 2 Re[ <d_mu|d_nu> + <d_mu|psi><d_nu|psi> ]
inline Eigen::MatrixXd metric_from_frame(const TangentFrame& f) {
  const Eigen::MatrixXcd gram = f.d.adjoint() * f.d;
  const Eigen::MatrixXcd outer = f.overlaps * f.overlaps.transpose();
  return 2.0 * (gram + outer).real();
}

// V_mu = 2 Im[ <d_mu|H|psi> + <psi|d_mu> <H> ]
inline Eigen::VectorXd force_from_frame(const TangentFrame& f) {
  const Eigen::VectorXcd hv = f.d.adjoint() * f.h_psi;
  return 2.0 * (hv + f.overlaps.conjugate() * f.energy).imag();
}

inline Eigen::MatrixXd build_m(const Ansatz& a) {
  return metric_from_frame(compute_tangent_frame(a));
}

inline Eigen::VectorXd build_v(const Ansatz& a, const PauliSum& h) {
  TangentFrame f = compute_tangent_frame(a);
  attach_hamiltonian(f, h);
  return force_from_frame(f);
}

inline void solve_system(McLachlanSystem& sys) {
  const Eigen::Index n = sys.m.rows();
  if (n == 0) {
    sys.theta_dot.resize(0);
    sys.l2 = sys.var2;
    return;
  }
  Eigen::MatrixXd a = sys.m;
  a.diagonal().array() += sys.xi;
  sys.llt.compute(a);
  if (sys.llt.info() != Eigen::Success)
    throw std::runtime_error("solve_system: factorization failed (metric not SPD)");
  sys.theta_dot = sys.llt.solve(sys.v);
  const double residual = (a * sys.theta_dot - sys.v).norm();
  if (!(residual <= 1e-10 * std::max(1.0, sys.v.norm())))
    throw std::runtime_error("solve_system: residual beyond tolerance");
  sys.l2 = sys.var2 - sys.v.dot(sys.theta_dot);
  if (std::isnan(sys.l2))
    throw std::runtime_error("solve_system: non-finite distance");
}

inline Eigen::VectorXd solve_theta_dot(const Eigen::MatrixXd& m,
                                       const Eigen::VectorXd& v, double xi) {
  McLachlanSystem sys;
  sys.m = m;
  sys.v = v;
  sys.xi = xi;
  solve_system(sys);
  return sys.theta_dot;
}

inline double mclachlan_distance(const Eigen::MatrixXd& m,
                                 const Eigen::VectorXd& v, double var2,
                                 double xi) {
  McLachlanSystem sys;
  sys.m = m;
  sys.v = v;
  sys.var2 = var2;
  sys.xi = xi;
  solve_system(sys);
  return sys.l2;
}

// Builds frame and system together; h_squared must be square(h) (any
// uncompressed refresh of it works, structure does not matter here).
inline McLachlanSystem build_system(const Ansatz& a, const PauliSum& h,
                                    const PauliSum& h_squared, double xi,
                                    TangentFrame& frame_out) {
  frame_out = compute_tangent_frame(a);
  attach_hamiltonian(frame_out, h);
  McLachlanSystem sys;
  sys.xi = xi;
  sys.energy = frame_out.energy;
  sys.m = metric_from_frame(frame_out);
  sys.v = force_from_frame(frame_out);
  sys.var2 =
      2.0 * variance_from_square(h_squared, frame_out.energy, frame_out.psi);
  solve_system(sys);
  return sys;
}

inline McLachlanSystem build_system(const Ansatz& a, const PauliSum& h,
                                    double xi) {
  TangentFrame frame;
  return build_system(a, h, square(h), xi, frame);
}

// One bordered row for a trial generator appended at angle zero.  The new
// derivative state is -i g |psi>, so only inner products against cached
// columns are needed.  With A = M + xi I factored and y = theta_dot:
//   schur = m_diag + xi - m_col^T A^-1 m_col
//   l2_new = l2 - (v_new - m_col^T y)^2 / schur
// which equals the full rebuild of the (n+1)-parameter system.
struct CandidateRow {
  Eigen::VectorXd m_col;
  double m_diag = 0.0;
  double v = 0.0;
  double l2 = 0.0;
};

inline CandidateRow candidate_row(const TangentFrame& f,
                                  const McLachlanSystem& sys,
                                  const PauliString& g) {
  CandidateRow row;
  Eigen::VectorXcd u = f.psi.amps;
  apply_pauli_inplace(g, u);
  const Eigen::VectorXcd d_new = complex(0.0, -1.0) * u;
  const complex o_new = d_new.dot(f.psi.amps);  // <d_new | psi>
  row.m_col = 2.0 * ((f.d.adjoint() * d_new) + f.overlaps * o_new).real();
  row.m_diag = 2.0 * ((d_new.dot(d_new) + o_new * o_new).real());
  row.v = 2.0 * (d_new.dot(f.h_psi) + std::conj(o_new) * f.energy).imag();

  if (sys.m.rows() == 0) {
    const double schur = row.m_diag + sys.xi;
    row.l2 = sys.var2 - row.v * row.v / schur;
    return row;
  }
  const Eigen::VectorXd x = sys.llt.solve(row.m_col);
  const double schur = row.m_diag + sys.xi - row.m_col.dot(x);
  const double resid = row.v - row.m_col.dot(sys.theta_dot);
  if (schur <= 1e-14) {
    row.l2 = sys.l2;  // direction already represented; no usable gain
    return row;
  }
  row.l2 = sys.l2 - resid * resid / schur;
  return row;
}

struct MeasurementResources {
  long long direct = 0;         // state preparations measured term by term
  long long hadamard_test = 0;  // controlled-evolution interference circuits
  long long adaptive_extra = 0; // additional circuits per pool scan
};

// Circuit counts per time step for n_h Hamiltonian terms and n_theta
// parameters; the (n_theta - 1) factors clamp at zero for an empty ansatz.
inline MeasurementResources estimate_measurement_resources(long long n_h,
                                                           long long n_theta) {
  if (n_h < 0 || n_theta < 0)
    throw std::invalid_argument("estimate_measurement_resources: negative count");
  MeasurementResources r;
  const long long nt1 = n_theta > 0 ? n_theta - 1 : 0;
  r.direct = (n_h + 2) * n_theta + n_h + n_h * n_h;
  r.hadamard_test = n_h * nt1 + n_theta * nt1 / 2;
  r.adaptive_extra = n_h * nt1;
  return r;
}

}  // namespace avqds
