#pragma once

#include "pflow/mat.hpp"

namespace pflow {

/// Thin SVD a = left * singular_values.asDiagonal() * right^T with
/// singular values sorted descending.  Signs are fixed so that the
/// largest-magnitude entry of each left singular vector is nonnegative
/// (ties broken by first occurrence); the paired right vector flips too,
/// keeping the product intact and the decomposition reproducible.
struct SvdResult {
  Mat left;
  Vec singular_values;
  Mat right;

  Mat reconstruct() const {
    return left * singular_values.asDiagonal() * right.transpose();
  }
};

/// Balanced factor pair.  In PSD mode v aliases u and the represented
/// matrix is u*u^T; otherwise it is u*v^T.
struct FactorPair {
  Mat u;
  Mat v;
  bool psd_mode = false;

  Mat product() const { return psd_mode ? Mat(u * u.transpose()) : Mat(u * v.transpose()); }
  Mat stacked() const;
};

struct AlignmentResult {
  Mat rotation;    // r x r orthogonal
  double distance; // ||u - x*rotation||_F
  Mat difference;  // u - x*rotation
};

SvdResult svd(const Mat& a);

/// Best rank-r approximation in Frobenius norm (Eckart-Young).  If r is at
/// least min(rows, cols) the input is returned unchanged.
Mat project_rank(const Mat& a, Index r);

/// Best rank-r PSD approximation of the symmetric part (s + s^T)/2: keep the
/// top-r algebraic eigenvalues clamped at zero.
Mat project_rank_psd(const Mat& s, Index r);

/// Factored forms of the two projections; avoids refactoring the iterate
/// when both the projected matrix and its factors are needed.  For the PSD
/// variant right == left and singular_values holds the clamped eigenvalues.
SvdResult project_rank_factored(const Mat& a, Index r);
SvdResult project_rank_psd_factored(const Mat& s, Index r);

/// Orthogonal Procrustes alignment of u onto x (same shape): the rotation
/// minimizing ||u - x R||_F is A*B^T where A*S*B^T = svd(x^T u).
AlignmentResult procrustes_align(const Mat& u, const Mat& x);

/// Procrustes distance min_R ||u - x R||_F.
double factor_dist(const Mat& u, const Mat& x);

/// Operator (largest singular value) norm.
double spectral_norm(const Mat& a);

/// Balanced rank-r factors of mtilde.  Rectangular: u = C sigma^{1/2},
/// v = D sigma^{1/2} from the top-r SVD.  PSD: u = v from the top-r
/// eigenpairs; eigenvalues below -1e-8 * ||mtilde||_2 raise NotPsd, small
/// negatives clamp to zero.
FactorPair extract_factors(const Mat& mtilde, Index r, bool psd);

/// extract_factors applied directly to an already-factored matrix.
FactorPair extract_factors(const SvdResult& factors, bool psd);

}  // namespace pflow
