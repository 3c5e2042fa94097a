#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pflow/linalg.hpp"
#include "pflow/sensing.hpp"

namespace pflow {

enum class EnsembleKind { Gaussian, Spiked };
const char* to_string(EnsembleKind k);
EnsembleKind ensemble_from_string(const std::string& s);

/// A planted recovery instance: truth of exact rank r with geometric
/// spectrum sigma_i = sigma1 * kappa^{-(i-1)/(r-1)}, random orthonormal
/// factor bases, measurements b = A(M).
struct PlantedProblem {
  Index n1 = 0, n2 = 0, r = 0;
  double kappa = 1.0, sigma1 = 1.0;
  bool psd = false;
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::uint64_t seed = 0;
  FactorPair truth;  // balanced: truth_m == truth.product()
  Mat truth_m;
  MeasurementOp op;
  Vec b;
};

PlantedProblem gen_problem(Index n1, Index n2, Index r, double kappa, double sigma1,
                           Index m, EnsembleKind kind, std::uint64_t seed, bool psd);

/// Haar-ish orthonormal n x r basis: QR of a seeded Gaussian matrix with the
/// R-diagonal sign fix, so the result is reproducible across platforms.
Mat random_orthonormal(Index n, Index r, std::uint64_t seed, std::uint64_t stream);

/// On-disk problem bundle: <prefix>.problem.json plus matrix/vector files it
/// points at.  The ensemble is regenerated from (generator, seed) unless an
/// explicit ensemble file was written alongside.
void save_problem(const std::string& prefix, const PlantedProblem& p,
                  bool write_ensemble_file = false);
PlantedProblem load_problem(const std::string& json_path);

}  // namespace pflow
