#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avqds/dense.hpp"
#include "avqds/models.hpp"
#include "avqds/observables.hpp"
#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

struct EvolutionRecord {
  double t = 0.0;
  long n_cx_total = 0;
  std::map<std::string, double> observables;
};

inline long trotter_cnots_per_step(const PauliSum& h) {
  long total = 0;
  for (const auto& t : h.terms())  // zero-angle rotations compile away
    if (t.coeff != 0.0 && t.str.weight() > 1) total += 2 * (t.str.weight() - 1);
  return total;
}

// first-order step: prod_mu exp(-i dt c_mu P_mu) with single-qubit terms
// applied before multi-qubit ones (term order within each group); splitting
// the strong local fields off first keeps the bond-field commutator error
// well below the naive term-order product
inline void trotter_step(const PauliSum& h, double dt, StateVector& s) {
  if (h.n_qubits() != s.n_qubits)
    throw std::invalid_argument("trotter_step: qubit counts differ");
  for (const auto& t : h.terms())
    if (t.str.weight() == 1)
      apply_pauli_rotation_inplace(t.str, dt * t.coeff, s.amps);
  for (const auto& t : h.terms())
    if (t.str.weight() != 1)
      apply_pauli_rotation_inplace(t.str, dt * t.coeff, s.amps);
}

// exp(-i H dt) through a dense Hermitian eigendecomposition; the
// decomposition is reused for every step with the same coefficient set
class ExactPropagator {
 public:
  explicit ExactPropagator(const PauliSum& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("ExactPropagator: eigensolver failed");
    evecs_ = es.eigenvectors();
    evals_ = es.eigenvalues();
    for (const auto& t : h.terms()) coeffs_.push_back(t.coeff);
  }

  bool matches(const PauliSum& h) const {
    if (h.size() != coeffs_.size()) return false;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (h.terms()[i].coeff != coeffs_[i]) return false;
    return true;
  }

  void apply(double dt, Eigen::VectorXcd& v) const {
    Eigen::VectorXcd y = evecs_.adjoint() * v;
    y.array() *= (complex(0.0, -dt) * evals_.array()).exp();
    v = evecs_ * y;
  }

  const Eigen::VectorXd& eigenvalues() const { return evals_; }

 private:
  Eigen::MatrixXcd evecs_;
  Eigen::VectorXd evals_;
  std::vector<double> coeffs_;
};

namespace detail {

template <typename StepFn>
std::vector<EvolutionRecord> run_mesh(StateVector psi, double t_final,
                                      double dt, const ObservableFn& observe,
                                      StepFn&& step) {
  if (dt <= 0.0) throw std::invalid_argument("run: dt must be positive");
  if (t_final < 0.0) throw std::invalid_argument("run: t_final must be >= 0");
  std::vector<EvolutionRecord> records;
  long n_cx = 0;
  long k = 0;
  double t = 0.0;
  records.push_back({t, n_cx, observe ? observe(t, psi) : std::map<std::string, double>{}});
  while (t < t_final - 1e-12) {
    // grid points are k*dt (no accumulation drift), last one snaps to t_final
    const double next = std::min(t_final, static_cast<double>(k + 1) * dt);
    n_cx += step(t, next - t, psi);  // left-endpoint Hamiltonian sampling
    ++k;
    t = next;
    records.push_back({t, n_cx, observe ? observe(t, psi) : std::map<std::string, double>{}});
  }
  return records;
}

}  // namespace detail

inline std::vector<EvolutionRecord> run_trotter(const Schedule& schedule,
                                                StateVector psi0,
                                                double t_final, double dt,
                                                const ObservableFn& observe) {
  return detail::run_mesh(
      std::move(psi0), t_final, dt, observe,
      [&schedule](double t, double step_dt, StateVector& s) {
        const PauliSum h = schedule.hamiltonian_at(t);
        trotter_step(h, step_dt, s);
        return trotter_cnots_per_step(h);
      });
}

inline std::vector<EvolutionRecord> run_exact(const Schedule& schedule,
                                              StateVector psi0, double t_final,
                                              double dt,
                                              const ObservableFn& observe) {
  std::optional<ExactPropagator> prop;
  return detail::run_mesh(
      std::move(psi0), t_final, dt, observe,
      [&schedule, &prop](double t, double step_dt, StateVector& s) {
        const PauliSum h = schedule.hamiltonian_at(t);
        if (!prop || !prop->matches(h)) prop.emplace(h);
        prop->apply(step_dt, s.amps);
        return 0L;
      });
}

// Reference trajectory served at monotonically nondecreasing times.  For a
// time-independent schedule the state is evaluated exactly at the requested
// time; for a ramp it is marched on a fixed dt mesh and the nearest grid
// point is returned.
class ExactReference {
 public:
  ExactReference(Schedule schedule, StateVector psi0, double dt)
      : schedule_(std::move(schedule)), state_(std::move(psi0)), dt_(dt) {
    if (dt <= 0.0) throw std::invalid_argument("ExactReference: dt must be positive");
    if (!schedule_.is_time_dependent())
      prop_.emplace(schedule_.structural());
    initial_ = state_;
  }

  const StateVector& state_at(double t) {
    if (t < last_request_ - 1e-12)
      throw std::logic_error("ExactReference: times must be nondecreasing");
    last_request_ = t;
    if (!schedule_.is_time_dependent()) {
      state_ = initial_;
      prop_->apply(t, state_.amps);
      return state_;
    }
    const long target = std::lround(t / dt_);
    while (steps_done_ < target) {
      const double t_k = static_cast<double>(steps_done_) * dt_;
      const PauliSum h = schedule_.hamiltonian_at(t_k);
      if (!prop_ || !prop_->matches(h)) prop_.emplace(h);
      prop_->apply(dt_, state_.amps);
      ++steps_done_;
    }
    return state_;
  }

  double grid_dt() const { return dt_; }

 private:
  Schedule schedule_;
  StateVector state_;
  StateVector initial_;
  double dt_;
  long steps_done_ = 0;
  double last_request_ = 0.0;
  std::optional<ExactPropagator> prop_;
};

}  // namespace avqds
