#include "pflow/certify.hpp"

#include <cmath>
#include <sstream>

#include "pflow/lifted.hpp"

namespace pflow {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skip: return "skip";
  }
  return "?";
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double tol_for(double scale) { return 1e-9 + 1e-10 * std::abs(scale); }

std::string sides(double lhs, double rhs) {
  std::ostringstream os;
  os.precision(12);
  os << "lhs=" << lhs << " rhs=" << rhs;
  return os.str();
}

// Report for an inequality lhs <= rhs (flip == false) or lhs >= rhs.
CheckReport ineq_report(std::string name, double lhs, double rhs, bool flip = false) {
  CheckReport rep;
  rep.name = std::move(name);
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.slack = flip ? lhs - rhs : rhs - lhs;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  rep.verdict = rep.slack >= -tol_for(scale) ? Verdict::Pass : Verdict::Fail;
  rep.detail = sides(lhs, rhs);
  return rep;
}

CheckReport skip_report(std::string name, std::string why) {
  CheckReport rep;
  rep.name = std::move(name);
  rep.verdict = Verdict::Skip;
  rep.detail = std::move(why);
  return rep;
}

double smallest_sv(const Mat& a) {
  const Vec sv = svd(a).singular_values;
  return sv(sv.size() - 1);
}

}  // namespace

CheckReport check_dist_upper_bound(const Mat& u, const Mat& x) {
  const char* name = "dist-upper-bound";
  const double sr = smallest_sv(x);
  if (sr <= 1e-12 * spectral_norm(x) || sr == 0.0)
    return skip_report(name, "x is rank deficient");
  const double d = factor_dist(u, x);
  const double gap = (u * u.transpose() - x * x.transpose()).norm();
  return ineq_report(name, d * d, gap * gap / (2.0 * (kSqrt2 - 1.0) * sr * sr));
}

CheckReport check_product_bound_sym(const Mat& u, const Mat& x) {
  const char* name = "product-bound-sym";
  const double xnorm = spectral_norm(x);
  const double d = factor_dist(u, x);
  if (d > xnorm / 4.0)
    return skip_report(name, "outside basin: dist > ||x||/4");
  const double gap = (u * u.transpose() - x * x.transpose()).norm();
  return ineq_report(name, gap, 2.25 * xnorm * d);
}

std::vector<CheckReport> check_dist_bounds(const Mat& u, const Mat& x) {
  if (u.rows() != x.rows() || u.cols() != x.cols())
    throw InvalidInput("check_dist_bounds: shape mismatch");
  return {check_dist_upper_bound(u, x), check_product_bound_sym(u, x)};
}

CheckReport check_regularity(const MeasurementOp& op, const Vec& b,
                             const FactorPair& pair, const FactorPair& truth) {
  if (pair.psd_mode != truth.psd_mode)
    throw InvalidInput("check_regularity: mixed pair modes");
  if (pair.psd_mode) {
    const char* name = "regularity-psd";
    const Mat& x = truth.u;
    const double sr = smallest_sv(x);
    const double xnorm = spectral_norm(x);
    const AlignmentResult al = procrustes_align(pair.u, x);
    if (al.distance > sr / 4.0)
      return skip_report(name, "outside basin: dist > sigma_r(x)/4");
    if (xnorm == 0.0) return skip_report(name, "zero truth");
    const ObjectiveEval eval = f_eval(op, b, pair.u);
    const double lhs = (eval.grad_u.array() * al.difference.array()).sum();
    const double rhs = 0.25 * sr * sr * al.distance * al.distance +
                       (32.0 / 425.0) * eval.grad_u.squaredNorm() / (xnorm * xnorm);
    return ineq_report(name, lhs, rhs, true);
  }
  const char* name = "regularity-rect";
  const Mat m = truth.u * truth.v.transpose();
  const Vec msv = svd(m).singular_values;
  const Index rank = truth.u.cols();
  const double sr = rank >= 1 && rank <= msv.size() ? msv(rank - 1) : 0.0;
  const double mnorm = msv(0);
  const Mat w = pair.stacked();
  const Mat z = truth.stacked();
  const AlignmentResult al = procrustes_align(w, z);
  if (sr <= 0.0) return skip_report(name, "rank-deficient truth product");
  if (al.distance > std::sqrt(sr) / (2.0 * kSqrt2))
    return skip_report(name, "outside basin: dist > sqrt(sigma_r(m))/(2 sqrt(2))");
  const ObjectiveEval eval = g_eval(op, b, pair);
  const Mat grad = eval.grad_stacked();
  const double lhs = (grad.array() * al.difference.array()).sum();
  const double rhs = sr / 8.0 * al.distance * al.distance +
                     (16.0 / 1683.0) * grad.squaredNorm() / mnorm;
  return ineq_report(name, lhs, rhs, true);
}

CheckReport check_lifted_gradient(const MeasurementOp& op, const Vec& b,
                                  const FactorPair& pair, const Mat& truth_m) {
  const char* name = "lifted-gradient-form";
  if ((op.apply(truth_m) - b).norm() > 1e-12 * (1.0 + b.norm()))
    throw InvalidInput("check_lifted_gradient: b does not measure truth_m");
  const ObjectiveEval eval = g_eval(op, b, pair);
  const Mat grad = eval.grad_stacked();
  const Mat w = pair.stacked();
  const Mat wwt = w * w.transpose();
  const Mat lifted =
      0.5 * lifted_adjoint(op, lifted_apply(op, wwt - sym_embed(truth_m))) * w +
      0.25 * (diag_blocks(wwt, op.n1()) - off_blocks(wwt, op.n1())) * w;
  const double err = (grad - lifted).norm();
  const double tol = 1e-10 * (1.0 + grad.norm());
  CheckReport rep = ineq_report(name, err, tol);
  rep.detail = "||grad - lifted form||_F vs tolerance; " + rep.detail;
  return rep;
}

CheckReport check_factor_perturbation(const Mat& m1, const Mat& m2, Index r) {
  const char* name = "factor-perturbation";
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw InvalidInput("check_factor_perturbation: shape mismatch");
  if (r < 1 || r > std::min(m1.rows(), m1.cols()))
    throw InvalidInput("check_factor_perturbation: invalid rank");
  const SvdResult s1 = svd(m1);
  const SvdResult s2 = svd(m2);
  for (const SvdResult* s : {&s1, &s2}) {
    const Vec& sv = s->singular_values;
    if (sv(r - 1) <= 0.0 ||
        (sv.size() > r && sv(r) > 1e-8 * sv(0)))
      throw InvalidInput("check_factor_perturbation: input is not rank r");
  }
  const double sr1 = s1.singular_values(r - 1);
  const double op_gap = spectral_norm(m2 - m1);
  if (op_gap > sr1 / 2.0)
    return skip_report(name, "perturbation too large: ||m2-m1||_2 > sigma_r(m1)/2");
  const Vec root1 = s1.singular_values.head(r).cwiseSqrt();
  const Vec root2 = s2.singular_values.head(r).cwiseSqrt();
  Mat z1(m1.rows() + m1.cols(), r), z2(z1.rows(), r);
  z1.topRows(m1.rows()) = s1.left.leftCols(r) * root1.asDiagonal();
  z1.bottomRows(m1.cols()) = s1.right.leftCols(r) * root1.asDiagonal();
  z2.topRows(m2.rows()) = s2.left.leftCols(r) * root2.asDiagonal();
  z2.bottomRows(m2.cols()) = s2.right.leftCols(r) * root2.asDiagonal();
  const double d = factor_dist(z2, z1);
  const double fro_gap2 = (m2 - m1).squaredNorm();
  return ineq_report(name, d * d, 2.0 / (kSqrt2 - 1.0) * fro_gap2 / sr1);
}

CheckReport check_product_dist_bound(const FactorPair& pair, const FactorPair& truth) {
  const char* name = "product-dist-bound";
  const Mat w = pair.stacked();
  const Mat z = truth.stacked();
  if (w.rows() != z.rows() || w.cols() != z.cols())
    throw InvalidInput("check_product_dist_bound: shape mismatch");
  const double znorm = spectral_norm(z);
  const double d = factor_dist(w, z);
  if (d > znorm / 4.0)
    return skip_report(name, "outside basin: dist > ||z||/4");
  const double gap = (pair.u * pair.v.transpose() - truth.u * truth.v.transpose()).norm();
  return ineq_report(name, gap, 9.0 / (4.0 * kSqrt2) * znorm * d);
}

std::vector<CheckReport> certify_solution(const MeasurementOp& op, const Vec& b,
                                          const FactorPair& pair,
                                          const FactorPair& truth) {
  std::vector<CheckReport> out;
  const Mat truth_m = truth.product();
  if (pair.psd_mode && truth.psd_mode) {
    auto db = check_dist_bounds(pair.u, truth.u);
    out.insert(out.end(), db.begin(), db.end());
    out.push_back(check_regularity(op, b, pair, truth));
  } else {
    auto db = check_dist_bounds(pair.stacked(), truth.stacked());
    out.insert(out.end(), db.begin(), db.end());
    out.push_back(check_regularity(op, b, pair, truth));
    out.push_back(check_lifted_gradient(op, b, pair, truth_m));
    out.push_back(check_product_dist_bound(pair, truth));
  }
  try {
    out.push_back(check_factor_perturbation(truth_m, pair.product(), pair.u.cols()));
  } catch (const InvalidInput&) {
    out.push_back(skip_report("factor-perturbation", "solution product is not clean rank r"));
  }
  return out;
}

}  // namespace pflow
