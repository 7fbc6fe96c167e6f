#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "avqds/ansatz.hpp"
#include "avqds/mclachlan.hpp"
#include "avqds/models.hpp"
#include "avqds/observables.hpp"
#include "avqds/pauli.hpp"
#include "avqds/state.hpp"

namespace avqds {

struct AvqdsConfig {
  double xi = 1e-6;              // tikhonov shift on the metric
  double l2_cut = 1e-3;          // grow the ansatz while the distance exceeds this
  double dtheta_max = 5e-3;      // per-step cap on max |theta_dot| dt
  double dt_max = 5e-3;
  double improvement_floor = 1e-8;  // minimum distance gain per added operator
  int max_adds_per_step = -1;       // -1: up to the pool size
};

struct TrajectoryRecord {
  double t = 0.0;
  std::vector<double> thetas;
  long n_theta = 0;
  long n_cx = 0;       // cnots in one execution of the current circuit
  double l2 = 0.0;     // squared McLachlan distance after adaptation
  double dt_used = 0.0;  // step that arrived here (0 for the first record)
  bool stalled = false;  // pool exhausted above the distance cut
  std::map<std::string, double> observables;
};

// Unique phase-free strings of a Hamiltonian, in term order.
inline std::vector<PauliString> hamiltonian_pool(const PauliSum& h) {
  std::vector<PauliString> pool;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& t : h.terms()) {
    const PauliString p = t.str.without_phase();
    if (p.is_identity()) continue;
    if (seen.insert(p.pattern_key()).second) pool.push_back(p);
  }
  return pool;
}

// All weight-1 and weight-2 strings: 3n singles (site-major, X < Y < Z),
// then 9 n(n-1)/2 pairs ordered by (i, j, first letter, second letter).
inline std::vector<PauliString> two_local_pool(int n) {
  if (n < 1) throw std::invalid_argument("two_local_pool: n must be >= 1");
  constexpr char letters[3] = {'X', 'Y', 'Z'};
  std::vector<PauliString> pool;
  pool.reserve(3 * n + 9 * n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (char a : letters) {
      PauliString p(n);
      p.set_letter(i, a);
      pool.push_back(p);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (char a : letters)
        for (char b : letters) {
          PauliString p(n);
          p.set_letter(i, a);
          p.set_letter(j, b);
          pool.push_back(p);
        }
  return pool;
}

// Grows the ansatz until the distance drops below the cut.  Each round scans
// the pool with bordered candidate rows, appends the best operator at angle
// zero, and extends the frame and system in place (a zero-angle rotation
// leaves the state and all prior derivative columns unchanged).  Returns
// true if the pool could not reach the cut.
inline bool adapt_ansatz(Ansatz& a, TangentFrame& frame, McLachlanSystem& sys,
                         const std::vector<PauliString>& pool,
                         const AvqdsConfig& cfg) {
  if (pool.empty()) return sys.l2 > cfg.l2_cut;
  const int max_adds = cfg.max_adds_per_step < 0
                           ? static_cast<int>(pool.size())
                           : cfg.max_adds_per_step;
  int adds = 0;
  while (sys.l2 > cfg.l2_cut && adds < max_adds) {
    CandidateRow best;
    std::size_t best_idx = pool.size();
    best.l2 = sys.l2;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const CandidateRow row = candidate_row(frame, sys, pool[k]);
      if (row.l2 < best.l2) {  // strict: ties resolve to the lowest index
        best = row;
        best_idx = k;
      }
    }
    if (best_idx == pool.size() || sys.l2 - best.l2 < cfg.improvement_floor)
      return true;  // nothing in the pool helps; caller records the stall

    const PauliString& g = pool[best_idx];
    a.append(g, 0.0);

    Eigen::VectorXcd d_new = frame.psi.amps;
    apply_pauli_inplace(g, d_new);
    d_new *= complex(0.0, -1.0);
    const Eigen::Index n = frame.d.cols();
    frame.d.conservativeResize(Eigen::NoChange, n + 1);
    frame.d.col(n) = d_new;
    frame.overlaps.conservativeResize(n + 1);
    frame.overlaps(n) = d_new.dot(frame.psi.amps);

    sys.m.conservativeResize(n + 1, n + 1);
    sys.m.row(n).head(n) = best.m_col.transpose();
    sys.m.col(n).head(n) = best.m_col;
    sys.m(n, n) = best.m_diag;
    sys.v.conservativeResize(n + 1);
    sys.v(n) = best.v;
    solve_system(sys);
    ++adds;
  }
  return sys.l2 > cfg.l2_cut;
}

// Step size keeping every parameter increment below dtheta_max.
inline double adaptive_dt(const Eigen::VectorXd& theta_dot,
                          const AvqdsConfig& cfg, double t_remaining) {
  double dt = std::min(cfg.dt_max, t_remaining);
  if (theta_dot.size() > 0) {
    const double peak = theta_dot.cwiseAbs().maxCoeff();
    if (peak > 1e-12) dt = std::min(dt, cfg.dtheta_max / peak);
  }
  return dt;
}

struct AvqdsResult {
  std::vector<TrajectoryRecord> records;
  Ansatz ansatz;  // final circuit; generators are only ever appended, so the
                  // circuit at record k is its first n_theta(k) generators
};

// Variational evolution under schedule.hamiltonian_at(t) from t = 0 to
// t_final.  The ansatz is adapted before every step; the first record is the
// (possibly adapted) t = 0 snapshot and the last lands exactly on t_final.
// Sorted landing_times are hit exactly by clipping the adaptive step.
inline AvqdsResult run_avqds(
    const Schedule& schedule, Ansatz a, const std::vector<PauliString>& pool,
    const AvqdsConfig& cfg, double t_final, const ObservableFn& observe,
    const std::vector<double>& landing_times = {}) {
  if (t_final < 0.0)
    throw std::invalid_argument("run_avqds: t_final must be >= 0");
  if (a.n_qubits() != schedule.n_qubits())
    throw std::invalid_argument("run_avqds: qubit counts differ");

  SquaredSumCache h2_cache(schedule.structural());
  std::vector<TrajectoryRecord> records;
  std::size_t next_landing = 0;
  double t = 0.0;
  double dt_used = 0.0;
  for (;;) {
    const PauliSum h = schedule.hamiltonian_at(t);
    const PauliSum& h2 = h2_cache.refresh(h);
    TangentFrame frame;
    McLachlanSystem sys = build_system(a, h, h2, cfg.xi, frame);

    bool stalled = false;
    if (t < t_final)  // no step follows the terminal record
      stalled = adapt_ansatz(a, frame, sys, pool, cfg);

    TrajectoryRecord rec;
    rec.t = t;
    rec.thetas = a.thetas();
    rec.n_theta = static_cast<long>(a.size());
    rec.n_cx = a.cnot_count();
    rec.l2 = sys.l2;
    rec.dt_used = dt_used;
    rec.stalled = stalled;
    if (observe) rec.observables = observe(t, frame.psi);
    records.push_back(std::move(rec));

    if (t >= t_final - 1e-12) break;
    while (next_landing < landing_times.size() &&
           landing_times[next_landing] <= t + 1e-12)
      ++next_landing;
    const double t_stop = next_landing < landing_times.size()
                              ? std::min(t_final, landing_times[next_landing])
                              : t_final;
    const double dt = adaptive_dt(sys.theta_dot, cfg, t_stop - t);
    if (sys.theta_dot.size() > 0)
      a.shift_thetas(sys.theta_dot * dt);
    t = (t + dt >= t_stop - 1e-12) ? t_stop : t + dt;
    dt_used = dt;
  }
  return {std::move(records), std::move(a)};
}

}  // namespace avqds
