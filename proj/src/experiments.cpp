#include "pflow/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace pflow {

namespace {

using nlohmann::json;

SolverConfig solver_from_json(const json& j, Index r, bool psd) {
  SolverConfig cfg;
  cfg.r = r;
  cfg.mode = psd ? SolveMode::Psd : SolveMode::Rectangular;
  if (!j.is_object()) return cfg;
  if (j.contains("mu") && !j["mu"].is_null()) cfg.mu = j["mu"].get<double>();
  if (j.contains("alpha") && !j["alpha"].is_null()) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("max_gd_iters")) cfg.max_gd_iters = j["max_gd_iters"].get<int>();
  if (j.contains("residual_tol")) cfg.residual_tol = j["residual_tol"].get<double>();
  if (j.contains("init_cap")) cfg.init_cap = j["init_cap"].get<int>();
  if (j.contains("t_init")) {
    const auto& t = j["t_init"];
    if (t.is_string()) {
      const std::string s = t.get<std::string>();
      if (s == "auto") cfg.schedule = InitSchedule::Auto;
      else if (s == "theory") cfg.schedule = InitSchedule::Theory;
      else throw InvalidInput("solver.t_init must be an integer, \"auto\" or \"theory\"");
    } else {
      cfg.schedule = InitSchedule::Fixed;
      cfg.t_init = t.get<int>();
    }
  }
  return cfg;
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_text(const std::string& path, const std::string& text,
                std::vector<std::string>& written) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open for writing: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
  written.push_back(path);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int count = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

double rel_error(const Mat& m_hat, const Mat& truth) {
  const double base = truth.norm();
  return base > 0.0 ? (m_hat - truth).norm() / base : (m_hat - truth).norm();
}

struct TrialOutput {
  TrialRecord record;
  std::string trace_rows;
};

}  // namespace

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PFLOW_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput("bad experiment json: " + std::string(e.what()));
  }
  try {
    ExperimentSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    spec.n1 = j.at("n1").get<Index>();
    spec.n2 = j.at("n2").get<Index>();
    spec.r = j.at("r").get<Index>();
    if (j.contains("kappa")) spec.kappa = j["kappa"].get<double>();
    if (j.contains("sigma1")) spec.sigma1 = j["sigma1"].get<double>();
    spec.psd = j.value("psd", false);
    spec.ensemble = j.contains("ensemble")
                        ? ensemble_from_string(j["ensemble"].get<std::string>())
                        : (spec.psd ? EnsembleKind::Spiked : EnsembleKind::Gaussian);
    if (j.contains("m")) spec.m_grid.push_back(j["m"].get<Index>());
    if (j.contains("m_grid"))
      for (const auto& v : j.at("m_grid")) spec.m_grid.push_back(v.get<Index>());
    const auto& seeds = j.at("seeds");
    if (seeds.is_array()) {
      for (const auto& s : seeds) spec.seeds.push_back(s.get<std::uint64_t>());
    } else {
      const std::uint64_t base = seeds.at("base").get<std::uint64_t>();
      const std::uint64_t count = seeds.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i) spec.seeds.push_back(base + i);
    }
    spec.success_tol = j.value("success_tol", spec.kind == "phase_transition" ? 1e-4 : 1e-6);
    spec.solver = solver_from_json(j.contains("solver") ? j["solver"] : json(), spec.r, spec.psd);
    spec.iht_iters = j.value("iht_iters", 500);
    spec.threads = j.value("threads", 0);
    spec.output_prefix = j.at("output_prefix").get<std::string>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw InvalidInput("bad experiment json: " + std::string(e.what()));
  }
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_json_text(buf.str());
}

void ExperimentSpec::validate() const {
  if (kind != "convergence" && kind != "phase_transition" && kind != "pf_vs_iht")
    throw InvalidInput("experiment kind must be convergence, phase_transition or pf_vs_iht");
  if (m_grid.empty()) throw InvalidInput("experiment needs m (or m_grid for phase)");
  if (kind != "phase_transition" && m_grid.size() != 1)
    throw InvalidInput(kind + " experiments take a single m");
  if (seeds.empty()) throw InvalidInput("experiment needs at least one seed");
  if (success_tol <= 0.0) throw InvalidInput("success_tol must be positive");
  if (iht_iters < 1) throw InvalidInput("iht_iters must be positive");
  if (output_prefix.empty()) throw InvalidInput("output_prefix is required");
  for (Index m : m_grid)
    if (m < 1) throw InvalidInput("all m values must be positive");
}

namespace {

TrialOutput run_single_pf(const ExperimentSpec& spec, Index m, std::uint64_t seed,
                          bool want_trace) {
  TrialOutput out;
  out.record.m = m;
  out.record.seed = seed;
  const auto start = std::chrono::steady_clock::now();

  PlantedProblem prob = gen_problem(spec.n1, spec.n2, spec.r, spec.kappa, spec.sigma1,
                                    m, spec.ensemble, seed, spec.psd);
  SolverConfig cfg = spec.solver;
  // Finish below the success bar so the success check is on the solution.
  cfg.residual_tol = std::min(cfg.residual_tol, 0.4 * spec.success_tol);
  Solution sol = procrustes_flow(prob.op, prob.b, cfg, &prob.truth);

  out.record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.record.final_rel_error = rel_error(sol.m_hat, prob.truth_m);
  out.record.success = out.record.final_rel_error <= spec.success_tol;
  out.record.svd_count = static_cast<int>(sol.trace.init.size());
  out.record.gd_iters = static_cast<int>(sol.trace.gd.size());
  const double bnorm = prob.b.norm();
  for (std::size_t t = 0; t < sol.trace.gd.size(); ++t) {
    const double rel = bnorm > 0.0 ? sol.trace.gd[t].residual / bnorm : sol.trace.gd[t].residual;
    if (rel <= spec.success_tol) {
      out.record.iterations_to_tol = static_cast<int>(t);
      break;
    }
  }

  if (want_trace) {
    const double mu = cfg.mu_value();
    const double rate = 1.0 - (spec.psd ? 8.0 / 25.0 : 4.0 / 25.0) * mu / spec.kappa;
    const Mat target = spec.psd ? prob.truth.u : prob.truth.stacked();
    const Vec sv = svd(target).singular_values;
    const double sr = sv(sv.size() - 1);
    std::ostringstream rows;
    for (std::size_t t = 0; t < sol.trace.init.size(); ++t) {
      const auto& rec = sol.trace.init[t];
      rows << seed << ",init," << t + 1 << ',' << csv_num(rec.residual) << ",,"
           << csv_num(rec.sigma_r) << ",,,\n";
    }
    for (std::size_t t = 0; t < sol.trace.gd.size(); ++t) {
      const auto& rec = sol.trace.gd[t];
      const double envelope =
          0.25 * std::pow(rate, 0.5 * static_cast<double>(t)) * sr;
      rows << seed << ",gd," << t << ',' << csv_num(rec.residual) << ','
           << csv_num(rec.objective) << ",," << csv_num(rec.dist) << ','
           << csv_num(rec.contraction) << ',' << csv_num(envelope) << '\n';
    }
    out.trace_rows = rows.str();
  }
  return out;
}

}  // namespace

ExperimentResult run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != "convergence")
    throw InvalidInput("run_convergence: spec kind is " + spec.kind);
  const Index m = spec.m_grid[0];
  const int n = static_cast<int>(spec.seeds.size());
  std::vector<TrialOutput> outs(static_cast<std::size_t>(n));
  parallel_for(n, resolve_thread_count(spec.threads), [&](int i) {
    outs[static_cast<std::size_t>(i)] =
        run_single_pf(spec, m, spec.seeds[static_cast<std::size_t>(i)], true);
  });

  ExperimentResult result;
  std::ostringstream trials;
  trials << "m,seed,success,iterations_to_tol,final_rel_error,svd_count,gd_iters,"
            "wall_seconds\n";
  std::ostringstream trace;
  trace << "seed,phase,iter,residual,objective,sigma_r,dist,contraction,envelope\n";
  for (const auto& o : outs) {
    const auto& r = o.record;
    trials << r.m << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
           << r.iterations_to_tol << ',' << csv_num(r.final_rel_error) << ','
           << r.svd_count << ',' << r.gd_iters << ',' << csv_num(r.wall_seconds)
           << '\n';
    trace << o.trace_rows;
    result.trials.push_back(r);
  }
  write_text(spec.output_prefix + ".trials.csv", trials.str(), result.files_written);
  write_text(spec.output_prefix + ".trace.csv", trace.str(), result.files_written);
  return result;
}

ExperimentResult run_phase_transition(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != "phase_transition")
    throw InvalidInput("run_phase_transition: spec kind is " + spec.kind);
  const int per_m = static_cast<int>(spec.seeds.size());
  const int total = per_m * static_cast<int>(spec.m_grid.size());
  std::vector<TrialOutput> outs(static_cast<std::size_t>(total));
  parallel_for(total, resolve_thread_count(spec.threads), [&](int i) {
    const Index m = spec.m_grid[static_cast<std::size_t>(i / per_m)];
    const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(i % per_m)];
    outs[static_cast<std::size_t>(i)] = run_single_pf(spec, m, seed, false);
  });

  ExperimentResult result;
  std::ostringstream table;
  table << "m,trials,successes,success_rate,median_final_rel_error\n";
  for (std::size_t g = 0; g < spec.m_grid.size(); ++g) {
    int successes = 0;
    std::vector<double> errs;
    for (int s = 0; s < per_m; ++s) {
      const auto& r = outs[g * static_cast<std::size_t>(per_m) + static_cast<std::size_t>(s)].record;
      successes += r.success ? 1 : 0;
      errs.push_back(r.final_rel_error);
      result.trials.push_back(r);
    }
    std::sort(errs.begin(), errs.end());
    const std::size_t n = errs.size();
    const double median =
        n % 2 == 1 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
    table << spec.m_grid[g] << ',' << per_m << ',' << successes << ','
          << csv_num(static_cast<double>(successes) / per_m) << ','
          << csv_num(median) << '\n';
  }
  write_text(spec.output_prefix + ".phase.csv", table.str(), result.files_written);
  return result;
}

ExperimentResult run_pf_vs_iht(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.kind != "pf_vs_iht")
    throw InvalidInput("run_pf_vs_iht: spec kind is " + spec.kind);
  const Index m = spec.m_grid[0];
  const int n = static_cast<int>(spec.seeds.size());
  std::vector<TrialOutput> pf(static_cast<std::size_t>(n));
  std::vector<TrialRecord> iht(static_cast<std::size_t>(n));

  // Theory-sized initialization from the true conditioning, so the
  // projection budget is pinned per instance.
  const double kappa = spec.kappa;
  const int t_theory = std::max(
      1, static_cast<int>(
             spec.psd
                 ? std::ceil(std::log(std::sqrt(static_cast<double>(spec.r)) * kappa)) + 2.0
                 : std::ceil(3.0 * std::log(std::sqrt(static_cast<double>(spec.r)) * kappa) + 5.0)));

  parallel_for(n, resolve_thread_count(spec.threads), [&](int i) {
    const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(i)];
    ExperimentSpec pf_spec = spec;
    pf_spec.solver.schedule = InitSchedule::Fixed;
    pf_spec.solver.t_init = t_theory;
    pf[static_cast<std::size_t>(i)] = run_single_pf(pf_spec, m, seed, false);

    PlantedProblem prob = gen_problem(spec.n1, spec.n2, spec.r, spec.kappa,
                                      spec.sigma1, m, spec.ensemble, seed, spec.psd);
    const auto start = std::chrono::steady_clock::now();
    IhtResult run = iht_baseline(prob.op, prob.b, spec.r, spec.iht_iters, spec.psd,
                                 &prob.truth_m, 0.4 * spec.success_tol);
    TrialRecord rec;
    rec.m = m;
    rec.seed = seed;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.final_rel_error = rel_error(run.mtilde, prob.truth_m);
    rec.success = rec.final_rel_error <= spec.success_tol;
    rec.svd_count = static_cast<int>(run.trace.init.size());
    rec.gd_iters = 0;
    const double base = prob.truth_m.norm();
    for (std::size_t t = 0; t < run.trace.init.size(); ++t) {
      if (run.trace.init[t].err_to_truth <= spec.success_tol * base) {
        rec.iterations_to_tol = static_cast<int>(t + 1);
        break;
      }
    }
    iht[static_cast<std::size_t>(i)] = rec;
  });

  ExperimentResult result;
  std::ostringstream table;
  table << "method,m,seed,success,iterations_to_tol,final_rel_error,svd_count,"
           "wall_seconds\n";
  for (int i = 0; i < n; ++i) {
    const auto& r = pf[static_cast<std::size_t>(i)].record;
    table << "pf," << r.m << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
          << r.iterations_to_tol << ',' << csv_num(r.final_rel_error) << ','
          << r.svd_count << ',' << csv_num(r.wall_seconds) << '\n';
    result.trials.push_back(r);
  }
  for (int i = 0; i < n; ++i) {
    const auto& r = iht[static_cast<std::size_t>(i)];
    table << "iht," << r.m << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
          << r.iterations_to_tol << ',' << csv_num(r.final_rel_error) << ','
          << r.svd_count << ',' << csv_num(r.wall_seconds) << '\n';
    result.iht_trials.push_back(r);
  }
  write_text(spec.output_prefix + ".compare.csv", table.str(), result.files_written);
  return result;
}

}  // namespace pflow
