#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "avqds/ansatz.hpp"
#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

struct VqeConfig {
  double grad_tol = 1e-3;    // pool-gradient threshold ending the outer loop
  double energy_tol = 1e-8;  // energy-change stop for the inner minimizer
  int max_operators = 200;
  int max_inner_iters = 500;
};

struct VqeResult {
  Ansatz ansatz;
  double energy = 0.0;
  double pool_grad_max = 0.0;  // at the returned parameters
  int operators_added = 0;
  bool converged = false;
};

// d<H>/dtheta at theta = 0 for exp(-i theta g) appended after the circuit:
// -2 Im <g psi | H psi>
inline double appended_operator_gradient(const StateVector& psi,
                                         const Eigen::VectorXcd& h_psi,
                                         const PauliString& g) {
  Eigen::VectorXcd gp = psi.amps;
  apply_pauli_inplace(g, gp);
  return -2.0 * gp.dot(h_psi).imag();
}

// Energy and full parameter gradient in one reverse sweep: O(n) rotations.
// With a_mu the prefix state through rotation mu and b_mu the suffix-adjoint
// image of H|psi>, dE/dtheta_mu = -2 Im <g_mu a_mu | b_mu>.
inline double vqe_energy_and_gradient(const Ansatz& a, const PauliSum& h,
                                      Eigen::VectorXd& grad) {
  const StateVector psi = a.evaluate();
  Eigen::VectorXcd b = apply_pauli_sum(h, psi.amps);
  const double energy = psi.amps.dot(b).real();

  const std::size_t n = a.size();
  grad.resize(static_cast<Eigen::Index>(n));
  Eigen::VectorXcd av = psi.amps;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t mu = n - 1 - step;
    const PauliString& g = a.generator(mu);
    Eigen::VectorXcd gav = av;
    apply_pauli_inplace(g, gav);
    grad(static_cast<Eigen::Index>(mu)) = -2.0 * gav.dot(b).imag();
    const double theta = a.theta(mu);
    apply_pauli_rotation_inplace(g, -theta, av);
    apply_pauli_rotation_inplace(g, -theta, b);
  }
  return energy;
}

namespace detail {

// L-BFGS with an Armijo backtracking line search.  Returns the minimized
// energy; the ansatz parameters are updated in place.
inline double minimize_parameters(Ansatz& a, const PauliSum& h,
                                  const VqeConfig& cfg) {
  const std::size_t n = a.size();
  if (n == 0) return expectation(h, a.reference());

  Eigen::VectorXd theta(static_cast<Eigen::Index>(n));
  for (std::size_t mu = 0; mu < n; ++mu)
    theta(static_cast<Eigen::Index>(mu)) = a.theta(mu);

  const auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
    for (std::size_t mu = 0; mu < n; ++mu)
      a.set_theta(mu, th(static_cast<Eigen::Index>(mu)));
    return vqe_energy_and_gradient(a, h, g);
  };

  Eigen::VectorXd grad;
  double f = eval(theta, grad);

  const int history = 8;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < cfg.max_inner_iters; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-9) break;

    // two-loop recursion
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = dir.dot(grad);
    if (!(slope < 0.0)) {  // not a descent direction; restart from steepest
      dir = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    Eigen::VectorXd theta_new, grad_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      theta_new = theta + step * dir;
      f_new = eval(theta_new, grad_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      eval(theta, grad);  // restore the incumbent parameters
      break;
    }

    const Eigen::VectorXd s = theta_new - theta;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double decrease = f - f_new;
    theta = std::move(theta_new);
    grad = std::move(grad_new);
    f = f_new;
    if (decrease < cfg.energy_tol) break;
  }

  for (std::size_t mu = 0; mu < n; ++mu)
    a.set_theta(mu, theta(static_cast<Eigen::Index>(mu)));
  return f;
}

}  // namespace detail

// Iterative ground-state construction: append the pool operator with the
// largest energy gradient (lowest index on ties), reoptimize every angle,
// repeat until the whole pool is below grad_tol.
inline VqeResult prepare_ground_state(const PauliSum& h,
                                      const StateVector& reference,
                                      const std::vector<PauliString>& pool,
                                      const VqeConfig& cfg = {}) {
  if (pool.empty())
    throw std::invalid_argument("prepare_ground_state: empty pool");
  if (h.n_qubits() != reference.n_qubits)
    throw std::invalid_argument("prepare_ground_state: qubit counts differ");

  VqeResult res{Ansatz(reference)};
  res.energy = expectation(h, reference);

  for (int round = 0; round < cfg.max_operators; ++round) {
    const StateVector psi = res.ansatz.evaluate();
    const Eigen::VectorXcd h_psi = apply_pauli_sum(h, psi.amps);

    double best_mag = 0.0;
    std::size_t best_idx = pool.size();
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const double mag =
          std::abs(appended_operator_gradient(psi, h_psi, pool[k]));
      if (mag > best_mag + 1e-15) {
        best_mag = mag;
        best_idx = k;
      }
    }
    res.pool_grad_max = best_mag;
    if (best_mag < cfg.grad_tol) {
      res.converged = true;
      return res;
    }

    res.ansatz.append(pool[best_idx], 0.0);
    ++res.operators_added;
    res.energy = detail::minimize_parameters(res.ansatz, h, cfg);
  }
  // final gradient audit after exhausting the operator budget
  const StateVector psi = res.ansatz.evaluate();
  const Eigen::VectorXcd h_psi = apply_pauli_sum(h, psi.amps);
  double best_mag = 0.0;
  for (const auto& g : pool)
    best_mag = std::max(best_mag, std::abs(appended_operator_gradient(psi, h_psi, g)));
  res.pool_grad_max = best_mag;
  res.converged = best_mag < cfg.grad_tol;
  return res;
}

}  // namespace avqds
