#include "pflow/objectives.hpp"

namespace pflow {

ObjectiveEval f_eval(const MeasurementOp& op, const Vec& b, const Mat& u) {
  if (op.n1() != op.n2())
    throw InvalidInput("f_eval: symmetric objective needs a square operator");
  if (u.rows() != op.n1()) throw InvalidInput("f_eval: factor height mismatch");
  if (b.size() != op.m()) throw InvalidInput("f_eval: measurement length mismatch");
  ObjectiveEval out;
  out.residual = op.apply(u * u.transpose()) - b;
  out.value = 0.25 * out.residual.squaredNorm();
  out.grad_u = op.adjoint(out.residual) * u;
  return out;
}

ObjectiveEval g_eval(const MeasurementOp& op, const Vec& b, const FactorPair& pair) {
  const Mat& u = pair.u;
  const Mat& v = pair.v;
  if (u.rows() != op.n1() || v.rows() != op.n2())
    throw InvalidInput("g_eval: factor heights do not match the operator");
  if (u.cols() != v.cols()) throw InvalidInput("g_eval: factor widths differ");
  if (b.size() != op.m()) throw InvalidInput("g_eval: measurement length mismatch");
  ObjectiveEval out;
  out.residual = op.apply(u * v.transpose()) - b;
  const Mat gram_gap = u.transpose() * u - v.transpose() * v;
  out.value = 0.5 * out.residual.squaredNorm() + gram_gap.squaredNorm() / 16.0;
  const Mat adj = op.adjoint(out.residual);
  out.grad_u = adj * v + 0.25 * u * gram_gap;
  out.grad_v = adj.transpose() * u - 0.25 * v * gram_gap;
  return out;
}

ObjectiveEval ref_f_eval(const Mat& u, const Mat& x) {
  if (u.rows() != x.rows() || u.cols() != x.cols())
    throw InvalidInput("ref_f_eval: shape mismatch");
  ObjectiveEval out;
  const Mat gap = u * u.transpose() - x * x.transpose();
  out.value = 0.25 * gap.squaredNorm();
  out.grad_u = gap * u;
  return out;
}

ObjectiveEval ref_f_eval(const FactorPair& pair, const FactorPair& truth) {
  if (pair.psd_mode && truth.psd_mode) return ref_f_eval(pair.u, truth.u);
  const Mat w = pair.stacked();
  const Mat z = truth.stacked();
  ObjectiveEval stacked = ref_f_eval(w, z);
  ObjectiveEval out;
  out.value = stacked.value;
  out.grad_u = stacked.grad_u.topRows(pair.u.rows());
  out.grad_v = stacked.grad_u.bottomRows(pair.v.rows());
  return out;
}

}  // namespace pflow
