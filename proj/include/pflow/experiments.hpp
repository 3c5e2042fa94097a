#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pflow/problem.hpp"
#include "pflow/solver.hpp"

namespace pflow {

/// Batch experiment description, normally parsed from a JSON file.
/// Schema (README documents the details):
///   kind: "convergence" | "phase_transition" | "pf_vs_iht"
///   n1, n2, r, kappa, sigma1, psd
///   ensemble: optional ("spiked" default when psd, else "gaussian")
///   m: single measurement count (convergence, compare)
///   m_grid: list of measurement counts (phase)
///   seeds: explicit list, or {"base": B, "count": C} for B..B+C-1
///   success_tol: optional (1e-4 for phase, 1e-6 otherwise)
///   solver: optional overrides {mu, alpha, t_init (int|"auto"|"theory"),
///           max_gd_iters, residual_tol, init_cap}
///   iht_iters: optional IHT step cap for compare (default 500)
///   threads: optional worker count; else env PFLOW_THREADS, else 1
///   output_prefix: path prefix for result CSVs
struct ExperimentSpec {
  std::string kind;
  Index n1 = 0, n2 = 0, r = 1;
  double kappa = 1.0, sigma1 = 1.0;
  bool psd = false;
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::vector<Index> m_grid;
  std::vector<std::uint64_t> seeds;
  double success_tol = 1e-6;
  SolverConfig solver;
  int iht_iters = 500;
  int threads = 0;
  std::string output_prefix;

  static ExperimentSpec from_json_text(const std::string& text);
  static ExperimentSpec from_json_file(const std::string& path);
  void validate() const;
};

struct TrialRecord {
  Index m = 0;
  std::uint64_t seed = 0;
  bool success = false;
  int iterations_to_tol = -1;  // first descent iterate within tolerance
  double final_rel_error = 0.0;
  double wall_seconds = 0.0;
  int svd_count = 0;  // rank-r projections spent in initialization
  int gd_iters = 0;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::vector<TrialRecord> iht_trials;  // compare runs only
  std::vector<std::string> files_written;
};

/// Convergence study at fixed m: per-trial summary CSV plus a per-iteration
/// trace CSV with the theoretical distance envelope alongside.
ExperimentResult run_convergence(const ExperimentSpec& spec);

/// Success-rate sweep over m_grid; one CSV row per m.
ExperimentResult run_phase_transition(const ExperimentSpec& spec);

/// Procrustes flow (theory-sized init) vs plain hard thresholding on the
/// same instances; one CSV row per method per seed.
ExperimentResult run_pf_vs_iht(const ExperimentSpec& spec);

int resolve_thread_count(int requested);

}  // namespace pflow
