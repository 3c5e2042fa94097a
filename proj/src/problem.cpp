#include "pflow/problem.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "pflow/rng.hpp"

namespace pflow {

namespace {

constexpr std::uint64_t kTruthStreamLeft = 1ull << 48;
constexpr std::uint64_t kTruthStreamRight = (1ull << 48) + 1;

}  // namespace

const char* to_string(EnsembleKind k) {
  return k == EnsembleKind::Gaussian ? "gaussian" : "spiked";
}

EnsembleKind ensemble_from_string(const std::string& s) {
  if (s == "gaussian") return EnsembleKind::Gaussian;
  if (s == "spiked") return EnsembleKind::Spiked;
  throw InvalidInput("unknown ensemble kind: " + s);
}

Mat random_orthonormal(Index n, Index r, std::uint64_t seed, std::uint64_t stream) {
  if (r < 1 || r > n) throw InvalidInput("random_orthonormal: need 1 <= r <= n");
  Philox rng(seed, stream);
  Mat g(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < r; ++j) g(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, r);
  const Mat rfac = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j)
    if (rfac(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

PlantedProblem gen_problem(Index n1, Index n2, Index r, double kappa, double sigma1,
                           Index m, EnsembleKind kind, std::uint64_t seed, bool psd) {
  if (n1 < 1 || n2 < 1) throw InvalidInput("gen_problem: dimensions must be positive");
  if (r < 1 || r > std::min(n1, n2)) throw InvalidInput("gen_problem: need 1 <= r <= min(n1,n2)");
  if (kappa < 1.0) throw InvalidInput("gen_problem: kappa must be >= 1");
  if (r == 1 && kappa != 1.0)
    throw InvalidInput("gen_problem: rank-1 spectra have kappa == 1");
  if (sigma1 <= 0.0) throw InvalidInput("gen_problem: sigma1 must be positive");
  if (psd && n1 != n2) throw InvalidInput("gen_problem: PSD problems are square");
  if (kind == EnsembleKind::Spiked && !psd)
    throw InvalidInput("gen_problem: the spiked ensemble only senses symmetric matrices; use it with psd");

  PlantedProblem p;
  p.n1 = n1;
  p.n2 = n2;
  p.r = r;
  p.kappa = kappa;
  p.sigma1 = sigma1;
  p.psd = psd;
  p.ensemble = kind;
  p.seed = seed;

  Vec sigma(r);
  for (Index i = 0; i < r; ++i)
    sigma(i) = r == 1 ? sigma1
                      : sigma1 * std::pow(kappa, -static_cast<double>(i) /
                                                     static_cast<double>(r - 1));

  const Mat a = random_orthonormal(n1, r, seed, kTruthStreamLeft);
  const Mat bbasis = psd ? a : random_orthonormal(n2, r, seed, kTruthStreamRight);
  const Vec root = sigma.cwiseSqrt();
  p.truth.u = a * root.asDiagonal();
  p.truth.v = psd ? p.truth.u : Mat(bbasis * root.asDiagonal());
  p.truth.psd_mode = psd;
  p.truth_m = p.truth.product();

  p.op = kind == EnsembleKind::Spiked ? spiked_gaussian_ensemble(n1, m, seed)
                                      : gaussian_ensemble(n1, n2, m, seed);
  p.b = p.op.apply(p.truth_m);
  return p;
}

void save_problem(const std::string& prefix, const PlantedProblem& p,
                  bool write_ensemble_file) {
  nlohmann::json j;
  j["n1"] = p.n1;
  j["n2"] = p.n2;
  j["r"] = p.r;
  j["kappa"] = p.kappa;
  j["sigma1"] = p.sigma1;
  j["m"] = p.op.m();
  j["psd"] = p.psd;
  j["ensemble"] = to_string(p.ensemble);
  j["seed"] = p.seed;
  auto base = [&](const std::string& suffix) { return prefix + suffix; };
  j["files"]["truth_m"] = base(".truth.mat");
  j["files"]["x"] = base(".x.mat");
  j["files"]["y"] = base(".y.mat");
  j["files"]["b"] = base(".b.vec");
  write_matrix(base(".truth.mat"), p.truth_m);
  write_matrix(base(".x.mat"), p.truth.u);
  write_matrix(base(".y.mat"), p.truth.v);
  write_vector(base(".b.vec"), p.b);
  if (write_ensemble_file) {
    j["files"]["ensemble"] = base(".ensemble.txt");
    write_ensemble(base(".ensemble.txt"), p.op, p.seed, to_string(p.ensemble));
  }
  std::ofstream f(base(".problem.json"));
  if (!f) throw InvalidInput("cannot open for writing: " + base(".problem.json"));
  f << j.dump(2) << '\n';
}

PlantedProblem load_problem(const std::string& json_path) {
  std::ifstream f(json_path);
  if (!f) throw InvalidInput("cannot open for reading: " + json_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("bad problem json: " + std::string(e.what()));
  }
  try {
    const Index n1 = j.at("n1"), n2 = j.at("n2"), r = j.at("r");
    const double kappa = j.at("kappa"), sigma1 = j.at("sigma1");
    const Index m = j.at("m");
    const bool psd = j.at("psd");
    const EnsembleKind kind = ensemble_from_string(j.at("ensemble"));
    const std::uint64_t seed = j.at("seed");
    const auto& files = j.at("files");

    PlantedProblem p;
    p.n1 = n1;
    p.n2 = n2;
    p.r = r;
    p.kappa = kappa;
    p.sigma1 = sigma1;
    p.psd = psd;
    p.ensemble = kind;
    p.seed = seed;
    p.truth_m = read_matrix(files.at("truth_m").get<std::string>());
    p.truth.u = read_matrix(files.at("x").get<std::string>());
    p.truth.v = read_matrix(files.at("y").get<std::string>());
    p.truth.psd_mode = psd;
    p.b = read_vector(files.at("b").get<std::string>());
    if (files.contains("ensemble")) {
      LoadedEnsemble le = read_ensemble(files.at("ensemble").get<std::string>());
      p.op = std::move(le.op);
    } else {
      p.op = kind == EnsembleKind::Spiked ? spiked_gaussian_ensemble(n1, m, seed)
                                          : gaussian_ensemble(n1, n2, m, seed);
    }
    if (p.truth_m.rows() != n1 || p.truth_m.cols() != n2 || p.b.size() != p.op.m())
      throw InvalidInput("problem files disagree with header dimensions");
    if ((p.truth.product() - p.truth_m).norm() > 1e-10 * (1.0 + p.truth_m.norm()))
      throw InvalidInput("planted factors do not multiply to the stored truth");
    if ((p.op.apply(p.truth_m) - p.b).norm() > 1e-8 * (1.0 + p.b.norm()))
      throw InvalidInput("stored measurements do not match the ensemble and truth");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("bad problem json: " + std::string(e.what()));
  }
}

}  // namespace pflow
