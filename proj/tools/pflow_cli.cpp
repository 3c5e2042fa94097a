// Command line front end: problem generation, the two-phase solver, the
// hard-thresholding baseline, solution certification and batch experiments.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "pflow/certify.hpp"
#include "pflow/experiments.hpp"
#include "pflow/problem.hpp"
#include "pflow/solver.hpp"

using namespace pflow;
using nlohmann::json;

namespace {

struct GenFlags {
  Index n1 = 0, n2 = 0, r = 1, m = 0;
  double kappa = 1.0, sigma1 = 1.0;
  bool psd = false;
  std::string ensemble;
  std::uint64_t seed = 0;
};

void add_gen_flags(CLI::App* cmd, GenFlags& g, bool required) {
  auto* n1 = cmd->add_option("--n1", g.n1, "rows of the planted matrix");
  auto* n2 = cmd->add_option("--n2", g.n2, "columns of the planted matrix");
  auto* m = cmd->add_option("--m", g.m, "measurement count");
  cmd->add_option("--kappa", g.kappa, "condition number of the planted matrix");
  cmd->add_option("--sigma1", g.sigma1, "largest singular value");
  cmd->add_flag("--psd", g.psd, "plant a symmetric PSD matrix");
  cmd->add_option("--ensemble", g.ensemble, "gaussian or spiked")
      ->check(CLI::IsMember({"gaussian", "spiked"}));
  cmd->add_option("--seed", g.seed, "generation seed");
  if (required) {
    n1->required();
    n2->required();
    m->required();
  }
}

PlantedProblem problem_from_flags(const GenFlags& g) {
  const EnsembleKind kind = !g.ensemble.empty()
                                ? ensemble_from_string(g.ensemble)
                                : (g.psd ? EnsembleKind::Spiked : EnsembleKind::Gaussian);
  return gen_problem(g.n1, g.n2, g.r, g.kappa, g.sigma1, g.m, kind, g.seed, g.psd);
}

std::string cell(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_trace_csv(const std::string& path, const SolveTrace& trace,
                     const std::string& init_label = "init") {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open for writing: " + path);
  f << "phase,iter,residual,objective,sigma_r,dist,contraction\n";
  for (std::size_t t = 0; t < trace.init.size(); ++t) {
    const auto& rec = trace.init[t];
    f << init_label << ',' << t + 1 << ',' << cell(rec.residual) << ",,"
      << cell(rec.sigma_r) << ",,\n";
  }
  for (std::size_t t = 0; t < trace.gd.size(); ++t) {
    const auto& rec = trace.gd[t];
    f << "gd," << t << ',' << cell(rec.residual) << ',' << cell(rec.objective)
      << ",," << cell(rec.dist) << ',' << cell(rec.contraction) << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_solution(const std::string& prefix, const Solution& sol, bool psd) {
  json j;
  j["mode"] = psd ? "psd" : "rect";
  j["r"] = sol.factors.u.cols();
  j["converged"] = sol.converged;
  j["diverged"] = sol.trace.diverged;
  j["hit_iter_cap"] = sol.trace.hit_iter_cap;
  j["init_iterations"] = sol.trace.init.size();
  j["gd_iterations"] = sol.trace.gd.size();
  j["final_residual"] =
      sol.trace.gd.empty() ? json() : json(sol.trace.gd.back().residual);
  j["files"]["u"] = prefix + ".u.mat";
  j["files"]["v"] = prefix + ".v.mat";
  j["files"]["mhat"] = prefix + ".mhat.mat";
  write_matrix(prefix + ".u.mat", sol.factors.u);
  write_matrix(prefix + ".v.mat", sol.factors.v);
  write_matrix(prefix + ".mhat.mat", sol.m_hat);
  std::ofstream f(prefix + ".solution.json");
  if (!f) throw InvalidInput("cannot open for writing: " + prefix + ".solution.json");
  f << j.dump(2) << '\n';
}

FactorPair load_solution_factors(const std::string& prefix, bool& psd) {
  std::ifstream f(prefix + ".solution.json");
  if (!f) throw InvalidInput("cannot open for reading: " + prefix + ".solution.json");
  json j;
  try {
    f >> j;
    psd = j.at("mode").get<std::string>() == "psd";
    FactorPair pair;
    pair.u = read_matrix(j.at("files").at("u").get<std::string>());
    pair.v = read_matrix(j.at("files").at("v").get<std::string>());
    pair.psd_mode = psd;
    return pair;
  } catch (const json::exception& e) {
    throw InvalidInput("bad solution json: " + std::string(e.what()));
  }
}

InitSchedule parse_t_init(const std::string& s, int& t_fixed) {
  if (s == "auto") return InitSchedule::Auto;
  if (s == "theory") return InitSchedule::Theory;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    t_fixed = v;
    return InitSchedule::Fixed;
  } catch (const std::exception&) {
    throw CLI::ValidationError("--t-init", "expected a nonnegative integer, auto or theory");
  }
}

int run_bench(const std::string& which, const std::string& spec_path) {
  const ExperimentSpec spec = ExperimentSpec::from_json_file(spec_path);
  ExperimentResult res;
  if (which == "convergence") {
    res = run_convergence(spec);
  } else if (which == "phase") {
    res = run_phase_transition(spec);
  } else {
    res = run_pf_vs_iht(spec);
  }
  int successes = 0;
  for (const TrialRecord& t : res.trials) successes += t.success ? 1 : 0;
  std::cout << res.trials.size() << " trials, " << successes << " successes";
  if (!res.iht_trials.empty()) {
    int iht_successes = 0;
    for (const TrialRecord& t : res.iht_trials) iht_successes += t.success ? 1 : 0;
    std::cout << " (baseline: " << res.iht_trials.size() << " trials, "
              << iht_successes << " successes)";
  }
  std::cout << '\n';
  for (const std::string& f : res.files_written) std::cout << "wrote " << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank matrix recovery from linear measurements"};
  app.require_subcommand(1);

  // gen ----------------------------------------------------------------
  GenFlags gen_flags;
  std::string gen_out;
  bool gen_write_ensemble = false;
  auto* gen = app.add_subcommand("gen", "generate a planted problem bundle");
  add_gen_flags(gen, gen_flags, true);
  gen->add_option("--r", gen_flags.r, "planted rank")->required();
  gen->add_option("-o,--out", gen_out, "output path prefix")->required();
  gen->add_flag("--write-ensemble", gen_write_ensemble,
                "store the sensing matrices instead of just (generator, seed)");

  // solve ----------------------------------------------------------------
  GenFlags solve_gen;
  std::string solve_problem, solve_mode, solve_t_init = "theory", solve_trace;
  std::string solve_out = "solution";
  Index solve_r = 0;
  double solve_mu = 0.0, solve_alpha = 0.0;
  int solve_max_iters = 500;
  double solve_tol = 1e-10;
  auto* solve = app.add_subcommand("solve", "two-phase factored recovery");
  solve->add_option("--problem", solve_problem, "problem json to load");
  add_gen_flags(solve, solve_gen, false);
  solve->add_option("--mode", solve_mode, "psd or rect (default: from the problem)")
      ->check(CLI::IsMember({"psd", "rect"}));
  solve->add_option("--r", solve_r, "solve rank (default: planted rank)");
  auto* solve_mu_opt =
      solve->add_option("--mu", solve_mu, "descent step (default 36/425 psd, 2/187 rect)");
  auto* solve_alpha_opt =
      solve->add_option("--alpha", solve_alpha, "init step (default 1/m)");
  solve->add_option("--t-init", solve_t_init, "init steps: N, auto or theory");
  solve->add_option("--max-iters", solve_max_iters, "descent iteration cap");
  solve->add_option("--tol", solve_tol, "relative residual stop");
  solve->add_option("--trace", solve_trace, "per-iteration CSV path");
  solve->add_option("-o,--out", solve_out, "solution path prefix");

  // iht ----------------------------------------------------------------
  GenFlags iht_gen;
  std::string iht_problem, iht_trace;
  std::string iht_out = "iht";
  Index iht_r = 0;
  int iht_iters = 500;
  double iht_tol = 1e-10;
  auto* iht = app.add_subcommand("iht", "projected-gradient baseline");
  iht->add_option("--problem", iht_problem, "problem json to load");
  add_gen_flags(iht, iht_gen, false);
  iht->add_option("--r", iht_r, "projection rank (default: planted rank)");
  iht->add_option("--iters", iht_iters, "iteration cap");
  iht->add_option("--tol", iht_tol, "relative residual stop");
  iht->add_option("--trace", iht_trace, "per-iteration CSV path");
  iht->add_option("-o,--out", iht_out, "output path prefix");

  // certify ----------------------------------------------------------------
  std::string cert_problem, cert_solution, cert_out;
  auto* cert = app.add_subcommand("certify", "run every applicable checker");
  cert->add_option("--problem", cert_problem, "problem json")->required();
  cert->add_option("--solution", cert_solution, "solution path prefix")->required();
  cert->add_option("-o,--out", cert_out, "verdict json path (default stdout)");

  // bench ----------------------------------------------------------------
  auto* bench = app.add_subcommand(
      "bench", "batch experiments from a json spec (PFLOW_THREADS parallelizes)");
  bench->require_subcommand(1);
  std::string bench_spec;
  auto* bc = bench->add_subcommand("convergence", "per-iteration convergence study");
  auto* bp = bench->add_subcommand("phase", "success rate over a measurement grid");
  auto* bx = bench->add_subcommand("compare", "factored flow vs hard thresholding");
  for (CLI::App* sub : {bc, bp, bx})
    sub->add_option("--spec", bench_spec, "experiment spec json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const PlantedProblem p = problem_from_flags(gen_flags);
      save_problem(gen_out, p, gen_write_ensemble);
      std::cout << "wrote " << gen_out << ".problem.json\n";
      return 0;
    }

    if (solve->parsed()) {
      if (solve_r > 0) solve_gen.r = solve_r;
      const PlantedProblem p = !solve_problem.empty() ? load_problem(solve_problem)
                                                      : problem_from_flags(solve_gen);
      SolverConfig cfg;
      cfg.r = solve_r > 0 ? solve_r : p.r;
      const bool psd = solve_mode.empty() ? p.psd : solve_mode == "psd";
      cfg.mode = psd ? SolveMode::Psd : SolveMode::Rectangular;
      if (solve_mu_opt->count() > 0) cfg.mu = solve_mu;
      if (solve_alpha_opt->count() > 0) cfg.alpha = solve_alpha;
      cfg.schedule = parse_t_init(solve_t_init, cfg.t_init);
      cfg.max_gd_iters = solve_max_iters;
      cfg.residual_tol = solve_tol;

      const Solution sol = procrustes_flow(p.op, p.b, cfg, &p.truth);
      write_solution(solve_out, sol, psd);
      if (!solve_trace.empty()) write_trace_csv(solve_trace, sol.trace);

      const double rel_err =
          (sol.m_hat - p.truth_m).norm() / std::max(p.truth_m.norm(), 1e-300);
      std::cout << (sol.converged ? "converged" : "stopped") << " after "
                << sol.trace.init.size() << " init + " << sol.trace.gd.size()
                << " descent iterations\n";
      if (!sol.trace.gd.empty())
        std::cout << "final residual " << sol.trace.gd.back().residual << '\n';
      std::cout << "relative error vs planted truth " << rel_err << '\n';
      std::cout << "wrote " << solve_out << ".solution.json\n";
      return sol.trace.diverged ? 1 : 0;
    }

    if (iht->parsed()) {
      if (iht_r > 0) iht_gen.r = iht_r;
      const PlantedProblem p =
          !iht_problem.empty() ? load_problem(iht_problem) : problem_from_flags(iht_gen);
      const Index r = iht_r > 0 ? iht_r : p.r;
      const IhtResult run =
          iht_baseline(p.op, p.b, r, iht_iters, p.psd, &p.truth_m, iht_tol);
      write_matrix(iht_out + ".mhat.mat", run.mtilde);
      if (!iht_trace.empty()) write_trace_csv(iht_trace, run.trace, "iht");
      const double rel_err =
          (run.mtilde - p.truth_m).norm() / std::max(p.truth_m.norm(), 1e-300);
      std::cout << run.trace.init.size() << " iterations, relative error "
                << rel_err << '\n';
      std::cout << "wrote " << iht_out << ".mhat.mat\n";
      return 0;
    }

    if (cert->parsed()) {
      const PlantedProblem p = load_problem(cert_problem);
      bool psd = false;
      const FactorPair pair = load_solution_factors(cert_solution, psd);
      FactorPair truth = p.truth;
      truth.psd_mode = psd;
      json out = json::array();
      for (const CheckReport& rep : certify_solution(p.op, p.b, pair, truth)) {
        json j;
        j["name"] = rep.name;
        j["verdict"] = to_string(rep.verdict);
        if (rep.verdict != Verdict::Skip) {
          j["lhs"] = rep.lhs;
          j["rhs"] = rep.rhs;
          j["slack"] = rep.slack;
        }
        j["detail"] = rep.detail;
        out.push_back(j);
      }
      const std::string text = out.dump(2) + "\n";
      if (cert_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(cert_out);
        if (!f) throw InvalidInput("cannot open for writing: " + cert_out);
        f << text;
        std::cout << "wrote " << cert_out << '\n';
      }
      for (const auto& j : out)
        if (j["verdict"] == "fail") return 1;
      return 0;
    }

    if (bench->parsed()) {
      if (bc->parsed()) return run_bench("convergence", bench_spec);
      if (bp->parsed()) return run_bench("phase", bench_spec);
      return run_bench("compare", bench_spec);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
