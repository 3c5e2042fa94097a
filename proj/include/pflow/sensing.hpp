#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pflow/mat.hpp"

namespace pflow {

/// Linear measurement operator x -> ( <A_k, x> )_k for k = 0..m-1.
/// Matrices are stored stacked, one vectorized A_k per row, so apply and
/// adjoint are single GEMV calls.
class MeasurementOp {
 public:
  using Stacked = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Placeholder single zero measurement on 1x1 matrices; real operators
  /// come from the constructors below or the ensemble generators.
  MeasurementOp() : MeasurementOp(1, 1, false, Stacked::Zero(1, 1)) {}

  MeasurementOp(Index n1, Index n2, bool symmetric, Stacked rows);
  static MeasurementOp from_matrices(const std::vector<Mat>& mats, bool symmetric);

  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  Index m() const { return rows_.rows(); }
  bool symmetric() const { return symmetric_; }

  /// k-th measurement matrix as an n1 x n2 view.
  Eigen::Map<const Mat> matrix(Index k) const;

  Vec apply(const Mat& x) const;
  Mat adjoint(const Vec& z) const;

 private:
  Index n1_, n2_;
  bool symmetric_;
  Stacked rows_;  // m x (n1*n2), row k = vec(A_k) in column-major order
};

/// iid Gaussian ensemble: entries of each A_k drawn N(0, 1/m).
MeasurementOp gaussian_ensemble(Index n1, Index n2, Index m, std::uint64_t seed);

/// Symmetric "spiked" Gaussian ensemble on n x n: diagonal entries N(0, 1/m),
/// each off-diagonal pair shares a single N(0, 1/(2m)) draw.
MeasurementOp spiked_gaussian_ensemble(Index n, Index m, std::uint64_t seed);

/// Monte-Carlo restricted-isometry probe.  Sampled suprema only, so both
/// statistics are certified lower bounds on the true constants:
///   delta_hat = max_t | ||A(X_t)||^2 - 1 |           over unit rank-<=k X_t
///   rho_hat   = 2 max_t | <A(X_t),A(Y_t)> - <X_t,Y_t> |   at rank <= 2k
/// Symmetric operators are blind to the antisymmetric part of their input,
/// so for them the probe draws symmetric test matrices G diag(w) G^T; general
/// operators are probed with G1 G2^T.
struct RipProbeReport {
  Index rank_probed = 0;
  int trials = 0;
  double delta_hat = 0.0;
  double rho_hat = 0.0;
  std::uint64_t seed = 0;
};

RipProbeReport probe_rip(const MeasurementOp& op, Index rank, int trials,
                         std::uint64_t seed);

/// Single deviation-probe test matrix for a given trial index (unit
/// Frobenius norm); exposed so external checks can reproduce probe draws.
Mat probe_test_matrix(const MeasurementOp& op, Index rank, std::uint64_t seed,
                      std::uint64_t stream);

/// Ensemble file format: one header line
///   "n1 n2 m symmetric seed generator"
/// followed by m matrix blocks in the standard matrix text format.
void write_ensemble(const std::string& path, const MeasurementOp& op,
                    std::uint64_t seed, const std::string& generator);

struct LoadedEnsemble {
  MeasurementOp op;
  std::uint64_t seed;
  std::string generator;
};

LoadedEnsemble read_ensemble(const std::string& path);

}  // namespace pflow
