#include "pflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pflow {

Mat FactorPair::stacked() const {
  Mat w(u.rows() + v.rows(), u.cols());
  w.topRows(u.rows()) = u;
  w.bottomRows(v.rows()) = v;
  return w;
}

namespace {

void fix_signs(Mat& left, Mat& right) {
  for (Index j = 0; j < left.cols(); ++j) {
    Index imax = 0;
    left.col(j).cwiseAbs().maxCoeff(&imax);
    if (left(imax, j) < 0.0) {
      left.col(j) *= -1.0;
      right.col(j) *= -1.0;
    }
  }
}

}  // namespace

SvdResult svd(const Mat& a) {
  if (a.size() == 0) throw InvalidInput("svd: empty matrix");
  if (!all_finite(a)) throw InvalidInput("svd: non-finite entries");
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  fix_signs(out.left, out.right);
  return out;
}

SvdResult project_rank_factored(const Mat& a, Index r) {
  if (r < 1) throw InvalidInput("project_rank: r must be positive");
  SvdResult full = svd(a);
  const Index keep = std::min(r, full.singular_values.size());
  return {full.left.leftCols(keep), full.singular_values.head(keep),
          full.right.leftCols(keep)};
}

Mat project_rank(const Mat& a, Index r) {
  if (r >= std::min(a.rows(), a.cols())) {
    if (r < 1) throw InvalidInput("project_rank: r must be positive");
    if (!all_finite(a)) throw InvalidInput("project_rank: non-finite entries");
    return a;
  }
  return project_rank_factored(a, r).reconstruct();
}

SvdResult project_rank_psd_factored(const Mat& s, Index r) {
  if (r < 1) throw InvalidInput("project_rank_psd: r must be positive");
  if (s.rows() != s.cols()) throw InvalidInput("project_rank_psd: matrix not square");
  if (!all_finite(s)) throw InvalidInput("project_rank_psd: non-finite entries");
  const Mat sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("project_rank_psd: eigendecomposition failed");
  // Eigen reports eigenvalues ascending; take the top-r from the back.
  const Index n = sym.rows();
  const Index keep = std::min(r, n);
  Mat q(n, keep);
  Vec lam(keep);
  for (Index j = 0; j < keep; ++j) {
    q.col(j) = eig.eigenvectors().col(n - 1 - j);
    lam(j) = std::max(eig.eigenvalues()(n - 1 - j), 0.0);
  }
  Mat dummy = q;
  fix_signs(q, dummy);
  return {q, lam, q};
}

Mat project_rank_psd(const Mat& s, Index r) {
  SvdResult f = project_rank_psd_factored(s, r);
  return f.left * f.singular_values.asDiagonal() * f.left.transpose();
}

AlignmentResult procrustes_align(const Mat& u, const Mat& x) {
  if (u.rows() != x.rows() || u.cols() != x.cols())
    throw InvalidInput("procrustes_align: shape mismatch");
  if (!all_finite(u) || !all_finite(x))
    throw InvalidInput("procrustes_align: non-finite entries");
  const Index r = u.cols();
  const Mat cross = x.transpose() * u;
  Mat rot;
  if (cross.norm() == 0.0) {
    rot = Mat::Identity(r, r);
  } else {
    Eigen::JacobiSVD<Mat> dec(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rot = dec.matrixU() * dec.matrixV().transpose();
  }
  AlignmentResult out;
  out.rotation = rot;
  out.difference = u - x * rot;
  out.distance = out.difference.norm();
  return out;
}

double factor_dist(const Mat& u, const Mat& x) {
  return procrustes_align(u, x).distance;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (!all_finite(a)) throw InvalidInput("spectral_norm: non-finite entries");
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  // Largest eigenvalue of the smaller gram matrix.
  const Mat gram = a.rows() <= a.cols() ? Mat(a * a.transpose()) : Mat(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

FactorPair extract_factors(const SvdResult& factors, bool psd) {
  const Vec root = factors.singular_values.cwiseMax(0.0).cwiseSqrt();
  FactorPair out;
  out.psd_mode = psd;
  out.u = factors.left * root.asDiagonal();
  out.v = psd ? out.u : Mat(factors.right * root.asDiagonal());
  return out;
}

FactorPair extract_factors(const Mat& mtilde, Index r, bool psd) {
  if (r < 1) throw InvalidInput("extract_factors: r must be positive");
  if (psd) {
    if (mtilde.rows() != mtilde.cols())
      throw InvalidInput("extract_factors: psd mode needs a square matrix");
    const Mat sym = 0.5 * (mtilde + mtilde.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("extract_factors: eigendecomposition failed");
    const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale)
      throw NotPsd("extract_factors: matrix has a significantly negative eigenvalue");
    return extract_factors(project_rank_psd_factored(mtilde, r), true);
  }
  return extract_factors(project_rank_factored(mtilde, r), false);
}

}  // namespace pflow
