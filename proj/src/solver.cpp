#include "pflow/solver.hpp"

#include <cmath>
#include <iostream>

namespace pflow {

void SolverConfig::validate(Index m) const {
  if (r < 1) throw InvalidInput("solver: r must be positive");
  if (m < 1) throw InvalidInput("solver: need at least one measurement");
  if (alpha_value(m) <= 0.0) throw InvalidInput("solver: alpha must be positive");
  if (mu_value() <= 0.0) throw InvalidInput("solver: mu must be positive");
  if (schedule == InitSchedule::Fixed && t_init < 0)
    throw InvalidInput("solver: t_init must be nonnegative");
  if (init_cap < 1) throw InvalidInput("solver: init_cap must be positive");
  if (max_gd_iters < 0) throw InvalidInput("solver: max_gd_iters must be nonnegative");
  if (residual_tol < 0.0) throw InvalidInput("solver: residual_tol must be nonnegative");
}

namespace {

int theory_target(SolveMode mode, Index r, double kappa_hat) {
  const double base = std::log(std::sqrt(static_cast<double>(r)) * kappa_hat);
  double t = mode == SolveMode::Psd ? std::ceil(base) + 2.0 : std::ceil(3.0 * base + 5.0);
  return std::max(1, static_cast<int>(t));
}

struct PgdOptions {
  Index r = 1;
  bool psd = false;
  double step = 0.0;
  InitSchedule schedule = InitSchedule::Fixed;
  int t_fixed = 0;
  int cap = 200;
  SolveMode mode = SolveMode::Psd;
  const Mat* truth_m = nullptr;
  std::optional<double> residual_tol;
};

InitResult run_projected_gradient(const MeasurementOp& op, const Vec& b,
                                  const PgdOptions& opt) {
  InitResult out;
  out.mtilde = Mat::Zero(op.n1(), op.n2());
  out.factors = {Mat::Zero(op.n1(), opt.r), Vec::Zero(opt.r), Mat::Zero(op.n2(), opt.r)};
  const double bnorm = b.norm();

  Vec resid = -b;
  int steps = 0;
  while (true) {
    if (opt.schedule == InitSchedule::Fixed && steps >= opt.t_fixed) break;
    if (opt.schedule != InitSchedule::Fixed && steps >= opt.cap) break;

    const Mat candidate = out.mtilde - opt.step * op.adjoint(resid);
    if (!all_finite(candidate)) {
      out.trace.diverged = true;
      break;
    }
    SvdResult next_factors = opt.psd ? project_rank_psd_factored(candidate, opt.r)
                                     : project_rank_factored(candidate, opt.r);
    Mat next_mtilde = opt.psd
                          ? Mat(next_factors.left * next_factors.singular_values.asDiagonal() *
                                next_factors.left.transpose())
                          : next_factors.reconstruct();
    Vec next_resid = op.apply(next_mtilde) - b;
    if (!std::isfinite(next_resid.norm())) {
      out.trace.diverged = true;
      break;
    }
    out.factors = std::move(next_factors);
    out.mtilde = std::move(next_mtilde);
    resid = std::move(next_resid);
    ++steps;

    InitIterRecord rec;
    rec.residual = resid.norm();
    rec.sigma_r = out.factors.singular_values(out.factors.singular_values.size() - 1);
    rec.stop_pass = rec.sigma_r > 0.0 && rec.residual <= 0.15 * rec.sigma_r;
    rec.stop_margin = 0.15 * rec.sigma_r - rec.residual;
    if (opt.truth_m) rec.err_to_truth = (out.mtilde - *opt.truth_m).norm();
    out.trace.init.push_back(rec);

    if (opt.residual_tol &&
        rec.residual <= *opt.residual_tol * (bnorm > 0.0 ? bnorm : 1.0))
      break;
    if (opt.schedule == InitSchedule::Auto && rec.stop_pass) break;
    if (opt.schedule == InitSchedule::Theory) {
      const double kappa_hat =
          rec.sigma_r > 0.0 ? out.factors.singular_values(0) / rec.sigma_r : 1.0;
      if (steps >= std::min(theory_target(opt.mode, opt.r, kappa_hat), opt.cap)) break;
    }
  }
  out.trace.init_stop_satisfied =
      !out.trace.init.empty() && out.trace.init.back().stop_pass;
  return out;
}

double relative_residual(double resid, double bnorm) {
  return bnorm > 0.0 ? resid / bnorm : resid;
}

}  // namespace

StopCheck check_init_complete(const MeasurementOp& op, const Vec& b,
                              const SvdResult& factors) {
  StopCheck out;
  out.residual = (op.apply(factors.reconstruct()) - b).norm();
  out.sigma_r = factors.singular_values.size() > 0
                    ? factors.singular_values(factors.singular_values.size() - 1)
                    : 0.0;
  out.margin = 0.15 * out.sigma_r - out.residual;
  out.pass = out.sigma_r > 0.0 && out.margin >= 0.0;
  return out;
}

InitResult init_phase(const MeasurementOp& op, const Vec& b, const SolverConfig& cfg) {
  cfg.validate(op.m());
  if (b.size() != op.m()) throw InvalidInput("init_phase: measurement length mismatch");
  if (cfg.r > std::min(op.n1(), op.n2()))
    throw InvalidInput("init_phase: r exceeds matrix dimensions");
  PgdOptions opt;
  opt.r = cfg.r;
  opt.psd = cfg.mode == SolveMode::Psd;
  opt.step = cfg.alpha_value(op.m()) * static_cast<double>(op.m());
  opt.schedule = cfg.schedule;
  opt.t_fixed = cfg.t_init;
  opt.cap = cfg.init_cap;
  opt.mode = cfg.mode;
  InitResult out = run_projected_gradient(op, b, opt);
  if (cfg.mode == SolveMode::Rectangular && cfg.schedule == InitSchedule::Auto)
    out.trace.rect_stop_heuristic = true;
  return out;
}

Solution gd_phase(const MeasurementOp& op, const Vec& b, const FactorPair& start,
                  const SolverConfig& cfg, const FactorPair* truth) {
  cfg.validate(op.m());
  const bool psd = cfg.mode == SolveMode::Psd;
  Solution sol;
  sol.factors = start;
  sol.factors.psd_mode = psd;

  const double denom_u = std::pow(spectral_norm(start.u), 2);
  const double denom_v = psd ? denom_u : std::pow(spectral_norm(start.v), 2);
  const double mu = cfg.mu_value();
  const double bnorm = b.norm();

  Mat u = start.u;
  Mat v = psd ? start.u : start.v;
  Mat u_last = u, v_last = v;
  double prev_dist = std::numeric_limits<double>::quiet_NaN();
  Mat truth_m;
  if (truth) truth_m = truth->product();

  for (int t = 0;; ++t) {
    ObjectiveEval eval =
        psd ? f_eval(op, b, u) : g_eval(op, b, FactorPair{u, v, false});
    if (!std::isfinite(eval.value) || !all_finite(eval.grad_u) ||
        (!psd && !all_finite(eval.grad_v))) {
      sol.trace.diverged = true;
      u = u_last;
      v = v_last;
      break;
    }
    u_last = u;
    v_last = v;

    GdIterRecord rec;
    rec.objective = eval.value;
    rec.residual = eval.residual.norm();
    if (truth) {
      rec.dist = psd ? factor_dist(u, truth->u)
                     : factor_dist(FactorPair{u, v, false}.stacked(), truth->stacked());
      if (std::isfinite(prev_dist) && prev_dist > 0.0)
        rec.contraction = rec.dist / prev_dist;
      prev_dist = rec.dist;
      const Mat& right = psd ? u : v;
      rec.err_to_truth = (u * right.transpose() - truth_m).norm();
    }
    sol.trace.gd.push_back(rec);

    if (relative_residual(rec.residual, bnorm) <= cfg.residual_tol) {
      sol.converged = true;
      break;
    }
    if (t >= cfg.max_gd_iters) {
      sol.trace.hit_iter_cap = true;
      break;
    }
    if (denom_u <= 0.0 || (!psd && denom_v <= 0.0)) {
      sol.trace.diverged = true;
      break;
    }
    u -= (mu / denom_u) * eval.grad_u;
    if (!psd) v -= (mu / denom_v) * eval.grad_v;
    if (!all_finite(u) || (!psd && !all_finite(v))) {
      sol.trace.diverged = true;
      u = u_last;
      v = v_last;
      break;
    }
  }

  sol.factors.u = u;
  sol.factors.v = psd ? u : v;
  sol.m_hat = sol.factors.product();
  return sol;
}

Solution procrustes_flow(const MeasurementOp& op, const Vec& b,
                         const SolverConfig& cfg, const FactorPair* truth) {
  cfg.validate(op.m());
  const bool psd = cfg.mode == SolveMode::Psd;
  bool warn_asym = false;
  if (psd && !op.symmetric()) {
    warn_asym = true;
    std::cerr << "warning: PSD solve over an ensemble not flagged symmetric; "
                 "recovery guarantees do not apply\n";
  }
  InitResult init = init_phase(op, b, cfg);
  const FactorPair start = extract_factors(init.factors, psd);
  Solution sol = gd_phase(op, b, start, cfg, truth);
  sol.trace.init = std::move(init.trace.init);
  sol.trace.init_stop_satisfied = init.trace.init_stop_satisfied;
  sol.trace.diverged = sol.trace.diverged || init.trace.diverged;
  sol.trace.rect_stop_heuristic = init.trace.rect_stop_heuristic;
  sol.trace.psd_asymmetric_warning = warn_asym;
  return sol;
}

IhtResult iht_baseline(const MeasurementOp& op, const Vec& b, Index r, int iters,
                       bool psd, const Mat* truth_m,
                       std::optional<double> residual_tol) {
  if (r < 1 || r > std::min(op.n1(), op.n2()))
    throw InvalidInput("iht_baseline: invalid rank");
  if (iters < 1) throw InvalidInput("iht_baseline: need at least one iteration");
  if (b.size() != op.m()) throw InvalidInput("iht_baseline: measurement length mismatch");
  if (truth_m && (truth_m->rows() != op.n1() || truth_m->cols() != op.n2()))
    throw InvalidInput("iht_baseline: truth shape mismatch");
  PgdOptions opt;
  opt.r = r;
  opt.psd = psd;
  opt.step = 1.0;
  opt.schedule = InitSchedule::Fixed;
  opt.t_fixed = iters;
  opt.truth_m = truth_m;
  opt.residual_tol = residual_tol;
  InitResult run = run_projected_gradient(op, b, opt);
  return IhtResult{std::move(run.mtilde), std::move(run.trace)};
}

}  // namespace pflow
