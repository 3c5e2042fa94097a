#include "pflow/sensing.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pflow/rng.hpp"

namespace pflow {

namespace {

constexpr std::uint64_t kProbeDeltaBase = 1ull << 32;
constexpr std::uint64_t kProbeRhoBase = 1ull << 33;
constexpr Index kEntryBudget = Index(1) << 27;

void check_entry_budget(Index n1, Index n2, Index m) {
  if (n1 < 1 || n2 < 1 || m < 1)
    throw InvalidInput("ensemble dimensions must be positive");
  if (m > kEntryBudget / (n1 * n2))
    throw InvalidInput("ensemble too large: m*n1*n2 exceeds the 2^27 entry budget");
}

Mat gaussian_matrix(Philox& rng, Index rows, Index cols) {
  Mat g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = rng.next_gaussian();
  return g;
}

}  // namespace

MeasurementOp::MeasurementOp(Index n1, Index n2, bool symmetric, Stacked rows)
    : n1_(n1), n2_(n2), symmetric_(symmetric), rows_(std::move(rows)) {
  if (n1_ < 1 || n2_ < 1) throw InvalidInput("measurement matrices must be nonempty");
  if (rows_.cols() != n1_ * n2_)
    throw InvalidInput("stacked storage width does not match n1*n2");
  if (rows_.rows() < 1) throw InvalidInput("need at least one measurement");
  if (symmetric_ && n1_ != n2_)
    throw InvalidInput("symmetric ensembles must be square");
  if (!rows_.allFinite()) throw InvalidInput("measurement matrices contain non-finite entries");
  if (symmetric_) {
    for (Index k = 0; k < m(); ++k) {
      const auto a = matrix(k);
      const double defect = (a - a.transpose()).norm();
      if (defect > 1e-12 * std::max(1.0, a.norm()))
        throw InvalidInput("ensemble flagged symmetric but matrix is not");
    }
  }
}

MeasurementOp MeasurementOp::from_matrices(const std::vector<Mat>& mats, bool symmetric) {
  if (mats.empty()) throw InvalidInput("need at least one measurement");
  const Index n1 = mats[0].rows(), n2 = mats[0].cols();
  Stacked rows(static_cast<Index>(mats.size()), n1 * n2);
  for (Index k = 0; k < rows.rows(); ++k) {
    const Mat& a = mats[static_cast<std::size_t>(k)];
    if (a.rows() != n1 || a.cols() != n2)
      throw InvalidInput("measurement matrices must share one shape");
    rows.row(k) = Eigen::Map<const Vec>(a.data(), n1 * n2).transpose();
  }
  return MeasurementOp(n1, n2, symmetric, std::move(rows));
}

Eigen::Map<const Mat> MeasurementOp::matrix(Index k) const {
  if (k < 0 || k >= m()) throw InvalidInput("measurement index out of range");
  return Eigen::Map<const Mat>(rows_.row(k).data(), n1_, n2_);
}

Vec MeasurementOp::apply(const Mat& x) const {
  if (x.rows() != n1_ || x.cols() != n2_)
    throw InvalidInput("apply: matrix shape does not match the operator");
  return rows_ * Eigen::Map<const Vec>(x.data(), n1_ * n2_);
}

Mat MeasurementOp::adjoint(const Vec& z) const {
  if (z.size() != m()) throw InvalidInput("adjoint: vector length does not match m");
  Vec w = rows_.transpose() * z;
  return Eigen::Map<const Mat>(w.data(), n1_, n2_);
}

MeasurementOp gaussian_ensemble(Index n1, Index n2, Index m, std::uint64_t seed) {
  check_entry_budget(n1, n2, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  MeasurementOp::Stacked rows(m, n1 * n2);
  for (Index k = 0; k < m; ++k) {
    Philox rng(seed, static_cast<std::uint64_t>(k));
    Eigen::Map<Mat> a(rows.row(k).data(), n1, n2);
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n2; ++j) a(i, j) = scale * rng.next_gaussian();
  }
  return MeasurementOp(n1, n2, false, std::move(rows));
}

MeasurementOp spiked_gaussian_ensemble(Index n, Index m, std::uint64_t seed) {
  check_entry_budget(n, n, m);
  const double diag_scale = 1.0 / std::sqrt(static_cast<double>(m));
  const double off_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(m));
  MeasurementOp::Stacked rows(m, n * n);
  for (Index k = 0; k < m; ++k) {
    Philox rng(seed, static_cast<std::uint64_t>(k));
    Eigen::Map<Mat> a(rows.row(k).data(), n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        if (i == j) {
          a(i, i) = diag_scale * rng.next_gaussian();
        } else {
          const double v = off_scale * rng.next_gaussian();
          a(i, j) = v;
          a(j, i) = v;
        }
      }
    }
  }
  return MeasurementOp(n, n, true, std::move(rows));
}

Mat probe_test_matrix(const MeasurementOp& op, Index rank, std::uint64_t seed,
                      std::uint64_t stream) {
  Philox rng(seed, stream);
  Mat x;
  if (op.symmetric()) {
    const Mat g = gaussian_matrix(rng, op.n1(), rank);
    Vec w(rank);
    for (Index i = 0; i < rank; ++i) w(i) = rng.next_gaussian();
    x = g * w.asDiagonal() * g.transpose();
  } else {
    const Mat g1 = gaussian_matrix(rng, op.n1(), rank);
    const Mat g2 = gaussian_matrix(rng, op.n2(), rank);
    x = g1 * g2.transpose();
  }
  const double nrm = x.norm();
  if (nrm == 0.0) return x;
  return x / nrm;
}

RipProbeReport probe_rip(const MeasurementOp& op, Index rank, int trials,
                         std::uint64_t seed) {
  if (rank < 1) throw InvalidInput("probe_rip: rank must be positive");
  if (rank > std::min(op.n1(), op.n2()))
    throw InvalidInput("probe_rip: rank exceeds matrix dimensions");
  if (trials < 1) throw InvalidInput("probe_rip: need at least one trial");

  RipProbeReport rep;
  rep.rank_probed = rank;
  rep.trials = trials;
  rep.seed = seed;

  for (int t = 0; t < trials; ++t) {
    const Mat x = probe_test_matrix(op, rank, seed, kProbeDeltaBase + static_cast<std::uint64_t>(t));
    const double dev = std::abs(op.apply(x).squaredNorm() - 1.0);
    rep.delta_hat = std::max(rep.delta_hat, dev);
  }

  const Index pair_rank = std::min(Index(2) * rank, std::min(op.n1(), op.n2()));
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t base = kProbeRhoBase + 2ull * static_cast<std::uint64_t>(t);
    const Mat x = probe_test_matrix(op, pair_rank, seed, base);
    const Mat y = probe_test_matrix(op, pair_rank, seed, base + 1);
    const double defect =
        std::abs(op.apply(x).dot(op.apply(y)) - (x.array() * y.array()).sum());
    rep.rho_hat = std::max(rep.rho_hat, 2.0 * defect);
  }
  return rep;
}

void write_ensemble(const std::string& path, const MeasurementOp& op,
                    std::uint64_t seed, const std::string& generator) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open for writing: " + path);
  f << op.n1() << ' ' << op.n2() << ' ' << op.m() << ' '
    << (op.symmetric() ? 1 : 0) << ' ' << seed << ' ' << generator << '\n';
  for (Index k = 0; k < op.m(); ++k) write_matrix(f, op.matrix(k));
  if (!f) throw std::runtime_error("write failed: " + path);
}

LoadedEnsemble read_ensemble(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open for reading: " + path);
  Index n1, n2, m;
  int sym;
  std::uint64_t seed;
  std::string generator;
  if (!(f >> n1 >> n2 >> m >> sym >> seed >> generator))
    throw InvalidInput("bad ensemble header in " + path);
  if (sym != 0 && sym != 1) throw InvalidInput("symmetric flag must be 0 or 1");
  check_entry_budget(n1, n2, m);
  MeasurementOp::Stacked rows(m, n1 * n2);
  for (Index k = 0; k < m; ++k) {
    const Mat a = read_matrix(f);
    if (a.rows() != n1 || a.cols() != n2)
      throw InvalidInput("ensemble block shape does not match header");
    rows.row(k) = Eigen::Map<const Vec>(a.data(), n1 * n2).transpose();
  }
  return LoadedEnsemble{MeasurementOp(n1, n2, sym == 1, std::move(rows)), seed, generator};
}

}  // namespace pflow
