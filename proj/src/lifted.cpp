#include "pflow/lifted.hpp"

namespace pflow {

Mat sym_embed(const Mat& a) {
  const Index n1 = a.rows(), n2 = a.cols();
  Mat s = Mat::Zero(n1 + n2, n1 + n2);
  s.topRightCorner(n1, n2) = a;
  s.bottomLeftCorner(n2, n1) = a.transpose();
  return s;
}

namespace {

void check_partition(const Mat& w, Index n1) {
  if (w.rows() != w.cols()) throw InvalidInput("block projection: matrix not square");
  if (n1 < 0 || n1 > w.rows()) throw InvalidInput("block projection: bad split point");
}

}  // namespace

Mat diag_blocks(const Mat& w, Index n1) {
  check_partition(w, n1);
  const Index n2 = w.rows() - n1;
  Mat out = Mat::Zero(w.rows(), w.cols());
  out.topLeftCorner(n1, n1) = w.topLeftCorner(n1, n1);
  out.bottomRightCorner(n2, n2) = w.bottomRightCorner(n2, n2);
  return out;
}

Mat off_blocks(const Mat& w, Index n1) {
  check_partition(w, n1);
  const Index n2 = w.rows() - n1;
  Mat out = Mat::Zero(w.rows(), w.cols());
  out.topRightCorner(n1, n2) = w.topRightCorner(n1, n2);
  out.bottomLeftCorner(n2, n1) = w.bottomLeftCorner(n2, n1);
  return out;
}

Vec lifted_apply(const MeasurementOp& op, const Mat& x) {
  const Index n1 = op.n1(), n2 = op.n2();
  if (x.rows() != n1 + n2 || x.cols() != n1 + n2)
    throw InvalidInput("lifted_apply: matrix must be (n1+n2) square");
  const Mat eff = x.topRightCorner(n1, n2) + x.bottomLeftCorner(n2, n1).transpose();
  return op.apply(eff);
}

Mat lifted_adjoint(const MeasurementOp& op, const Vec& z) {
  return sym_embed(op.adjoint(z));
}

}  // namespace pflow
