#pragma once

#include "pflow/sensing.hpp"

namespace pflow {

/// Symmetric embedding of a rectangular matrix:
///   sym_embed(a) = [ 0    a ]
///                  [ a^T  0 ]
Mat sym_embed(const Mat& a);

/// Block projections of an (n1+n2) square matrix partitioned at n1:
/// diag_blocks keeps the two diagonal blocks, off_blocks the two
/// off-diagonal blocks.
Mat diag_blocks(const Mat& w, Index n1);
Mat off_blocks(const Mat& w, Index n1);

/// Lifted sensing: B_k = sym_embed(A_k), acting on (n1+n2) square matrices.
/// B(x)_k = <A_k, x_12 + x_21^T> and B*(z) = sym_embed(A*(z)).
Vec lifted_apply(const MeasurementOp& op, const Mat& x);
Mat lifted_adjoint(const MeasurementOp& op, const Vec& z);

}  // namespace pflow
