#pragma once

#include <string>
#include <vector>

#include "pflow/objectives.hpp"

namespace pflow {

enum class Verdict { Pass, Fail, Skip };
const char* to_string(Verdict v);

/// One numerically checked inequality.  lhs/rhs are the two sides in the
/// check's natural orientation (stated per check below); slack is oriented
/// so that nonnegative means satisfied, and small violations inside
/// 1e-9 + 1e-10 * scale still pass.  Skip means a precondition failed, so
/// the inequality asserts nothing on this input.
struct CheckReport {
  std::string name;
  Verdict verdict = Verdict::Skip;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  std::string detail;
};

/// dist^2(u, x) <= ||u u^T - x x^T||_F^2 / (2 (sqrt(2)-1) sigma_r^2(x)).
/// Needs x of full column rank; rank-deficient x skips.
CheckReport check_dist_upper_bound(const Mat& u, const Mat& x);

/// If dist(u, x) <= ||x||_2 / 4 then
/// ||u u^T - x x^T||_F <= (9/4) ||x||_2 dist(u, x).
CheckReport check_product_bound_sym(const Mat& u, const Mat& x);

/// Both factor-distance lemmas above.
std::vector<CheckReport> check_dist_bounds(const Mat& u, const Mat& x);

/// Regularity condition of the measurement objective in the basin.
/// PSD pairs: if dist(u, x) <= sigma_r(x)/4 then
///   <grad f(u), u - x R>
///     >= (sigma_r^2(x)/4) dist^2 + (32/(425 ||x||_2^2)) ||grad f||_F^2.
/// Rectangular pairs (on stacked factors w, z with planted m = x y^T):
///   if dist(w, z) <= sigma_r^(1/2)(m) / (2 sqrt(2)) then
///   <grad g(w), w - z R>
///     >= (sigma_r(m)/8) dist^2 + (16/(1683 ||m||_2)) ||grad g||_F^2.
/// Outside the basin the check skips.
CheckReport check_regularity(const MeasurementOp& op, const Vec& b,
                             const FactorPair& pair, const FactorPair& truth);

/// The rectangular gradient equals its lifted closed form
///   (1/2) B*B(w w^T - sym_embed(m)) w + (1/4)(P_diag - P_off)(w w^T) w,
/// checked to 1e-10 * (1 + ||grad||_F).  Requires b = A(truth_m).
CheckReport check_lifted_gradient(const MeasurementOp& op, const Vec& b,
                                  const FactorPair& pair, const Mat& truth_m);

/// Perturbation bound for balanced factors of two rank-r matrices: if
/// ||m2 - m1||_2 <= sigma_r(m1)/2 then
///   dist^2([x2;y2], [x1;y1]) <= (2/(sqrt(2)-1)) ||m2 - m1||_F^2 / sigma_r(m1).
/// Inputs must be rank r to tolerance 1e-8 relative on sigma_{r+1}.
CheckReport check_factor_perturbation(const Mat& m1, const Mat& m2, Index r);

/// If dist([u;v], [x;y]) <= ||[x;y]||_2 / 4 then
///   ||u v^T - x y^T||_F <= (9/(4 sqrt(2))) ||[x;y]||_2 dist.
CheckReport check_product_dist_bound(const FactorPair& pair, const FactorPair& truth);

/// Every check applicable to a solved instance, in a fixed order.
std::vector<CheckReport> certify_solution(const MeasurementOp& op, const Vec& b,
                                          const FactorPair& pair,
                                          const FactorPair& truth);

}  // namespace pflow
