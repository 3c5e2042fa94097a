#pragma once

#include "pflow/linalg.hpp"
#include "pflow/sensing.hpp"

namespace pflow {

struct ObjectiveEval {
  double value = 0.0;
  Mat grad_u;    // n1 x r
  Mat grad_v;    // n2 x r; empty for the symmetric objectives
  Vec residual;  // A(.) - b; empty for the reference objective

  Mat grad_stacked() const {
    if (grad_v.size() == 0) return grad_u;
    Mat g(grad_u.rows() + grad_v.rows(), grad_u.cols());
    g.topRows(grad_u.rows()) = grad_u;
    g.bottomRows(grad_v.rows()) = grad_v;
    return g;
  }
};

/// Symmetric objective f(u) = (1/4) ||A(u u^T) - b||^2 with gradient
/// A*(A(u u^T) - b) u.  The measurement matrices enter as given; nothing is
/// symmetrized, so asymmetric ensembles produce asymmetric adjoints.
ObjectiveEval f_eval(const MeasurementOp& op, const Vec& b, const Mat& u);

/// Rectangular objective
///   g(u,v) = (1/2) ||A(u v^T) - b||^2 + (1/16) ||u^T u - v^T v||_F^2.
ObjectiveEval g_eval(const MeasurementOp& op, const Vec& b, const FactorPair& pair);

/// Measurement-free reference objective (1/4) ||u u^T - x x^T||_F^2 with
/// gradient (u u^T - x x^T) u.
ObjectiveEval ref_f_eval(const Mat& u, const Mat& x);

/// Reference objective on factor pairs: PSD pairs use the form above on u;
/// otherwise it is evaluated on the stacked factors [u; v] against [x; y]
/// and the gradient comes back split into grad_u / grad_v.
ObjectiveEval ref_f_eval(const FactorPair& pair, const FactorPair& truth);

}  // namespace pflow
