// Benchmark CLI for the mpvi solvers.
//
//   mpvi generate ...   emit a problem instance as JSON
//   mpvi solve ...      run one solver mode, write a report document
//   mpvi compare ...    run several modes on paired instances, write CSV
//   mpvi verify ...     replay a saved report and check its invariants

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mpvi/harness.hpp"

namespace {

using mpvi::json;

struct CommonFlags {
  std::string config_path;
  std::string instance_path;
  std::string problem = "game";
  int n = 10;
  int m = 10;
  int centers = 5;
  std::string distribution = "normal";
  double eps = 1e-2;
  double l0 = 0.0;
  double delta0 = 0.0;
  double noise = 0.0;
  std::vector<std::string> modes;
  std::uint64_t seed = 1;
  int reps = 1;
  std::string x0 = "min";
  std::int64_t max_iterations = 100000;
  std::int64_t max_attempts = 400064;
  std::string out;
};

void add_problem_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--problem", flags.problem, "Problem kind")
      ->check(CLI::IsMember({"game", "fts", "fts-points", "fts-unitball"}));
  cmd->add_option("--n", flags.n, "Primal dimension / simplex size");
  cmd->add_option("--m", flags.m, "Dual dimension / constraint count");
  cmd->add_option("--centers", flags.centers, "Number of centers (fts)");
  cmd->add_option("--dist", flags.distribution, "Payoff distribution (game)")
      ->check(CLI::IsMember({"normal", "uniform"}));
  cmd->add_option("--seed", flags.seed, "Instance seed / seed base");
}

void add_solver_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--eps", flags.eps, "Target accuracy");
  cmd->add_option("--l0", flags.l0,
                  "Initial smoothness guess; <= 0 selects max|A_ij| for "
                  "games, 1.0 otherwise");
  cmd->add_option("--delta0", flags.delta0, "Initial inexactness guess");
  cmd->add_option("--noise", flags.noise, "Oracle noise bound delta");
  cmd->add_option("--mode", flags.modes, "Solver mode (repeatable)")
      ->check(CLI::IsMember({"mpai", "adaptive", "fixed", "bounded"}));
  cmd->add_option("--x0", flags.x0, "Start point: d.g.f. minimizer or the "
                                    "uniform sphere point (fts only)")
      ->check(CLI::IsMember({"min", "sphere"}));
  cmd->add_option("--max-iterations", flags.max_iterations,
                  "Outer iteration budget");
  cmd->add_option("--max-attempts", flags.max_attempts,
                  "Total prox-pair attempt budget");
  cmd->add_option("--config", flags.config_path,
                  "Flat JSON document with the same fields as the flags");
  cmd->add_option("--instance", flags.instance_path,
                  "Load the problem from an instance JSON document");
}

mpvi::ExperimentSpec make_spec(const CLI::App* cmd, const CommonFlags& flags,
                               mpvi::SolverMode default_mode) {
  mpvi::ExperimentSpec spec;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw CLI::ValidationError("--config: cannot open file");
    json doc = json::parse(in);
    spec = mpvi::experiment_spec_from_json(doc);
  } else {
    spec.modes = {default_mode};
  }
  auto passed = [cmd](const std::string& name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (passed("--problem")) spec.problem.kind = flags.problem;
  if (passed("--n")) spec.problem.n = flags.n;
  if (passed("--m")) spec.problem.m = flags.m;
  if (passed("--centers")) spec.problem.centers = flags.centers;
  if (passed("--dist"))
    spec.problem.distribution =
        mpvi::distribution_from_name(flags.distribution);
  if (passed("--seed")) {
    spec.problem.seed = flags.seed;
    spec.seed_base = flags.seed;
  }
  if (passed("--eps")) spec.epsilon = flags.eps;
  if (passed("--l0")) spec.L0 = flags.l0;
  if (passed("--delta0")) spec.delta0 = flags.delta0;
  if (passed("--noise")) spec.noise_delta = flags.noise;
  if (passed("--max-iterations"))
    spec.max_outer_iterations = flags.max_iterations;
  if (passed("--max-attempts")) spec.max_total_attempts = flags.max_attempts;
  if (passed("--x0")) spec.start = mpvi::start_from_name(flags.x0);
  if (passed("--reps")) spec.repetitions = flags.reps;
  if (passed("--out")) spec.output_path = flags.out;
  if (!flags.modes.empty()) {
    spec.modes.clear();
    for (const auto& m : flags.modes)
      spec.modes.push_back(mpvi::mode_from_name(m));
  }
  return spec;
}

int cmd_generate(const CommonFlags& flags, bool materialize) {
  mpvi::ProblemSpec spec;
  spec.kind = flags.problem;
  spec.n = flags.n;
  spec.m = flags.m;
  spec.centers = flags.centers;
  spec.distribution = mpvi::distribution_from_name(flags.distribution);
  spec.seed = flags.seed;
  const auto built = mpvi::build_problem(spec);
  const json doc = mpvi::instance_document(built, materialize);
  if (flags.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream out(flags.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + flags.out);
    out << doc.dump(2) << '\n';
    std::cout << "wrote " << flags.out << '\n';
  }
  return 0;
}

void print_report_summary(const mpvi::RunArtifact& run) {
  const auto& r = run.report;
  std::printf("mode=%s iterations=%zu attempts=%lld stop=%s\n",
              mpvi::mode_name(r.mode), r.records.size(),
              static_cast<long long>(r.total_attempts),
              mpvi::stop_reason_name(r.stop_reason));
  std::printf("  R^2=%.6g  S_N=%.6g  general_estimate=%.6g  error_term=%.6g\n",
              r.R_squared, r.S_N, r.general_estimate,
              r.S_N > 0 ? r.accumulated_error_term / r.S_N : 0.0);
  std::printf("  N_theory=%lld  seconds=%.3f\n",
              static_cast<long long>(run.n_theory), r.solve_seconds);
}

int cmd_solve(const CLI::App* cmd, const CommonFlags& flags) {
  mpvi::ExperimentSpec spec = make_spec(cmd, flags, mpvi::SolverMode::kMpai);
  spec.repetitions = 1;
  if (spec.modes.size() != 1)
    throw CLI::ValidationError("solve runs exactly one mode");
  std::string csv_path = spec.output_path;
  spec.output_path.clear();  // solve writes a report document, not CSV

  mpvi::ExperimentResult result;
  if (!flags.instance_path.empty()) {
    std::ifstream in(flags.instance_path);
    if (!in) throw CLI::ValidationError("--instance: cannot open file");
    const json doc = json::parse(in);
    mpvi::ExperimentSpec single = spec;
    single.problem = mpvi::problem_spec_from_json(doc);
    // Run directly on the materialized instance when one is embedded.
    mpvi::BuiltProblem built = mpvi::build_problem_from_instance(doc);
    mpvi::SolverConfig config;
    config.epsilon = single.epsilon;
    config.L0 = mpvi::auto_L0(built, single.L0);
    config.delta0 = single.delta0;
    config.max_outer_iterations = single.max_outer_iterations;
    config.max_total_attempts = single.max_total_attempts;
    config.mode = single.modes[0];
    if (single.start == mpvi::StartKind::kSphere)
      config.start =
          mpvi::fts_sphere_start(*built.fts);
    const std::uint64_t noise_seed =
        mpvi::derive_seed(single.problem.seed, 0x6e6f6973);
    mpvi::RunArtifact run;
    if (single.noise_delta > 0.0) {
      mpvi::NoisyOracle oracle(built.oracle, built.setup, single.noise_delta,
                               noise_seed);
      run.report = mpvi::solve(*built.setup, oracle, config);
    } else {
      run.report = mpvi::solve(*built.setup, built.oracle, config);
    }
    run.instance = mpvi::instance_document(built, doc.contains("payoff") ||
                                                      doc.contains("center_matrix"));
    run.config = config;
    run.noise_delta = single.noise_delta;
    run.noise_seed = noise_seed;
    run.start = single.start;
    run.n_theory = mpvi::theoretical_iterations(built, run.report);
    result.runs.push_back(std::move(run));
  } else {
    result = mpvi::run_experiment(spec);
  }

  print_report_summary(result.runs.front());
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + csv_path);
    out << mpvi::run_artifact_to_json(result.runs.front()).dump(2) << '\n';
    std::cout << "wrote " << csv_path << '\n';
  }
  return 0;
}

int cmd_compare(const CLI::App* cmd, const CommonFlags& flags) {
  mpvi::ExperimentSpec spec = make_spec(cmd, flags, mpvi::SolverMode::kMpai);
  if (flags.modes.empty() && flags.config_path.empty()) {
    spec.modes = {mpvi::SolverMode::kMpai,
                  mpvi::SolverMode::kAdaptiveFixedDelta,
                  mpvi::SolverMode::kFixedStep};
  }
  const auto result = mpvi::run_experiment(spec);
  for (const auto& run : result.runs) print_report_summary(run);
  if (!spec.output_path.empty())
    std::cout << "wrote " << spec.output_path << '\n';
  return 0;
}

int cmd_verify(const std::string& report_path, int probes) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open " + report_path);
  json doc = json::parse(in);
  // A reports file holds an array of run documents; verify each.
  std::vector<json> docs;
  if (doc.is_array())
    docs.assign(doc.begin(), doc.end());
  else
    docs.push_back(std::move(doc));

  bool all_ok = true;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const json& d = docs[i];
    std::printf("report %zu (%s, %s):\n", i,
                d.at("instance").at("problem").get<std::string>().c_str(),
                d.at("config").at("mode").get<std::string>().c_str());
    mpvi::BuiltProblem built;
    mpvi::RunReport replay = mpvi::replay_run(d, &built);

    auto check = [&all_ok](const char* name, bool ok) {
      std::printf("  %-28s %s\n", name, ok ? "PASS" : "FAIL");
      all_ok = all_ok && ok;
    };

    const json& res = d.at("result");
    bool match = replay.records.size() == res.at("iterations") &&
                 replay.total_attempts == res.at("total_attempts") &&
                 replay.S_N == res.at("S_N").get<double>() &&
                 replay.general_estimate ==
                     res.at("general_estimate").get<double>();
    const auto& recs = res.at("records");
    if (match && recs.size() == replay.records.size()) {
      for (std::size_t k = 0; k < recs.size(); ++k) {
        const auto& rec = replay.records[k];
        if (recs[k].at("L").get<double>() != rec.L ||
            recs[k].at("delta").get<double>() != rec.delta ||
            recs[k].at("attempts").get<int>() != rec.attempts) {
          match = false;
          break;
        }
      }
    }
    check("replay matches", match);

    double S = 0.0;
    Eigen::VectorXd y_weighted = Eigen::VectorXd::Zero(replay.x0.size());
    for (const auto& rec : replay.records) {
      S += 1.0 / rec.L;
      y_weighted += rec.y / rec.L;
    }
    check("S_N recomputes", std::abs(S - replay.S_N) <= 1e-12 * (1.0 + S));
    check("y_tilde recomputes",
          S > 0 && (y_weighted / S - replay.y_tilde).norm() <= 1e-12);
    check("estimate formula",
          std::abs(mpvi::general_estimate(replay) - replay.general_estimate) <=
              1e-12 * (1.0 + std::abs(replay.general_estimate)));

    const double noise_delta = d.at("noise").at("delta");
    if (noise_delta == 0.0 && replay.mode != mpvi::SolverMode::kFixedStep &&
        replay.mode != mpvi::SolverMode::kBoundedOperator) {
      // Deterministic oracle: the acceptance inequality and the trajectory
      // estimate can be re-evaluated directly.
      bool acceptance_ok = true;
      for (const auto& rec : replay.records) {
        const Eigen::VectorXd g_x = built.oracle(rec.x_prev);
        const Eigen::VectorXd g_y = built.oracle(rec.y);
        const double lhs = (g_y - g_x).dot(rec.y - rec.x_next);
        const double rhs =
            rec.L * (built.setup->bregman(rec.y, rec.x_prev) +
                     built.setup->bregman(rec.x_next, rec.y)) +
            rec.delta * built.setup->primal_norm(rec.y - rec.x_next);
        if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) {
          acceptance_ok = false;
          break;
        }
      }
      check("acceptance inequality", acceptance_ok);

      bool residuals_ok = true;
      mpvi::Rng rng = mpvi::derive_rng(d.at("instance").at("seed"), 0x70726f62);
      for (int p = 0; p < probes; ++p) {
        const Eigen::VectorXd probe = built.setup->sample(rng);
        const double residual =
            mpvi::trajectory_estimate_residual(replay, probe, *built.setup, built.oracle);
        if (residual < -1e-8 * std::max(1.0, std::abs(residual))) {
          residuals_ok = false;
          break;
        }
      }
      check("trajectory estimate", residuals_ok);
    }
    if (replay.mode == mpvi::SolverMode::kMpai)
      check("attempt bound",
            mpvi::attempt_bound_check(replay,
                                      mpvi::config_from_json(d.at("config"))));
  }
  std::printf("verify: %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive mirror-prox solvers for monotone variational "
               "inequalities"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool materialize = false;
  std::string report_path;
  int probes = 20;

  auto* generate = app.add_subcommand("generate", "Emit an instance JSON");
  add_problem_flags(generate, flags);
  generate->add_option("--out", flags.out, "Output path (default stdout)");
  generate->add_flag("--materialize", materialize,
                     "Embed the generated matrices");

  auto* solve = app.add_subcommand("solve", "Run a single solver");
  add_problem_flags(solve, flags);
  add_solver_flags(solve, flags);
  solve->add_option("--out", flags.out, "Report JSON output path");

  auto* compare = app.add_subcommand(
      "compare", "Run several modes on paired instances and noise");
  add_problem_flags(compare, flags);
  add_solver_flags(compare, flags);
  compare->add_option("--reps", flags.reps, "Number of repetitions");
  compare->add_option("--out", flags.out, "CSV output path");

  auto* verify = app.add_subcommand(
      "verify", "Replay a saved report and check its invariants");
  verify->add_option("--report", report_path, "Report or reports JSON")
      ->required();
  verify->add_option("--probes", probes, "Probe count for the estimate check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(flags, materialize);
    if (solve->parsed()) return cmd_solve(solve, flags);
    if (compare->parsed()) return cmd_compare(compare, flags);
    if (verify->parsed()) return cmd_verify(report_path, probes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
