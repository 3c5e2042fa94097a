#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "pflow/objectives.hpp"

namespace pflow {

enum class SolveMode { Psd, Rectangular };

/// How many projected-gradient initialization steps to run.
///   Theory: ceil(log(sqrt(r)*kappa_hat)) + 2 steps in PSD mode,
///           ceil(3*log(sqrt(r)*kappa_hat) + 5) in rectangular mode, with
///           kappa_hat re-estimated each step from the retained spectrum
///           (capped by init_cap).
///   Auto:   run until the spectral stop test passes, capped by init_cap.
///   Fixed:  exactly t_init steps.
enum class InitSchedule { Theory, Auto, Fixed };

struct SolverConfig {
  Index r = 1;
  SolveMode mode = SolveMode::Psd;
  std::optional<double> alpha;  // init step on the unit-variance ensemble, default 1/m
  std::optional<double> mu;     // descent step, default 36/425 psd, 2/187 rect
  InitSchedule schedule = InitSchedule::Theory;
  int t_init = 0;       // used by InitSchedule::Fixed
  int init_cap = 200;
  int max_gd_iters = 500;
  double residual_tol = 1e-10;  // relative to ||b||

  double mu_value() const {
    if (mu) return *mu;
    return mode == SolveMode::Psd ? 36.0 / 425.0 : 2.0 / 187.0;
  }
  double alpha_value(Index m) const {
    return alpha ? *alpha : 1.0 / static_cast<double>(m);
  }
  void validate(Index m) const;
};

struct InitIterRecord {
  double residual = 0.0;  // ||A(M_t) - b||_2
  double sigma_r = 0.0;   // smallest retained singular value of M_t
  bool stop_pass = false;
  double stop_margin = 0.0;  // (3/20) sigma_r - residual
  double err_to_truth = std::numeric_limits<double>::quiet_NaN();
};

struct GdIterRecord {
  double objective = 0.0;
  double residual = 0.0;
  double dist = std::numeric_limits<double>::quiet_NaN();
  double contraction = std::numeric_limits<double>::quiet_NaN();
  double err_to_truth = std::numeric_limits<double>::quiet_NaN();  // ||u v^T - m||_F
};

struct SolveTrace {
  std::vector<InitIterRecord> init;
  std::vector<GdIterRecord> gd;
  bool init_stop_satisfied = false;  // spectral stop test held at handoff
  bool diverged = false;
  bool hit_iter_cap = false;
  bool psd_asymmetric_warning = false;
  bool rect_stop_heuristic = false;
};

/// Spectral stop test for the initialization phase: with e = ||A(M)-b|| and
/// sigma_r the smallest retained singular value, pass means
/// e <= (3/20) sigma_r.  Sound certificate in PSD mode; in rectangular mode
/// it is only a heuristic and is flagged as such in traces.
struct StopCheck {
  bool pass = false;
  double residual = 0.0;
  double sigma_r = 0.0;
  double margin = 0.0;
};

StopCheck check_init_complete(const MeasurementOp& op, const Vec& b,
                              const SvdResult& factors);

struct InitResult {
  Mat mtilde;
  SvdResult factors;  // rank-r factored form of mtilde
  SolveTrace trace;
};

/// Projected-gradient initialization from M_0 = 0:
///   M_{t+1} = P_r( M_t - alpha * sum_k (<A_k, M_t> - b_k) A_k )
/// with P_r the rank-r projection (PSD-cone-restricted in PSD mode) and A_k
/// the unit-variance sensing matrices. The stored ensemble folds a 1/sqrt(m)
/// factor into each matrix, so the step applied to its adjoint is alpha * m;
/// the default alpha = 1/m makes that coefficient exactly 1.
InitResult init_phase(const MeasurementOp& op, const Vec& b, const SolverConfig& cfg);

struct Solution {
  FactorPair factors;
  Mat m_hat;
  bool converged = false;
  SolveTrace trace;
};

/// Factored gradient descent.  Steps are mu/||u_0||_2^2 (and mu/||v_0||_2^2
/// for the right factor); both denominators freeze at entry.
Solution gd_phase(const MeasurementOp& op, const Vec& b, const FactorPair& start,
                  const SolverConfig& cfg, const FactorPair* truth = nullptr);

/// Full pipeline: init_phase, balanced factor extraction, gd_phase.
Solution procrustes_flow(const MeasurementOp& op, const Vec& b,
                         const SolverConfig& cfg, const FactorPair* truth = nullptr);

struct IhtResult {
  Mat mtilde;
  SolveTrace trace;
};

/// Plain iterative hard thresholding: the initialization update run for a
/// fixed number of steps (the whole algorithm, no factored phase).  With
/// truth_m given, per-step matrix error lands in the trace; residual_tol (if
/// set, relative to ||b||) allows early exit.
IhtResult iht_baseline(const MeasurementOp& op, const Vec& b, Index r, int iters,
                       bool psd = false, const Mat* truth_m = nullptr,
                       std::optional<double> residual_tol = std::nullopt);

}  // namespace pflow
