// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line. Run via ctest or directly:
//
//   ./acceptance_tests --reporter compact
//
#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mpvi/harness.hpp"
#include "oracles.hpp"

using mpvi::SolverConfig;
using mpvi::SolverMode;
using mpvi::StopReason;
using mpvi::Vector;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int criterion, const char* name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("criterion %2d (%s): %s  [%.1fs]%s%s\n", criterion, name,
              pass ? "PASS" : "FAIL", seconds, detail.empty() ? "" : "  ",
              detail.c_str());
  std::fflush(stdout);
}

// The 20 noise-free benchmark games shared by criteria 2-5.
struct BenchRun {
  mpvi::MatrixGame game;
  SolverConfig config;
  mpvi::RunReport report;
};

const std::vector<BenchRun>& benchmark_runs() {
  static const std::vector<BenchRun> runs = [] {
    std::vector<BenchRun> out;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      BenchRun r;
      r.game = mpvi::generate_matrix_game(
          10, 10, mpvi::PayoffDistribution::kStandardNormal, seed);
      r.config.epsilon = 1e-2;
      r.config.L0 = mpvi::matrix_game_lipschitz(r.game);
      r.config.delta0 = 1e-12;
      const auto setup = mpvi::matrix_game_setup(r.game);
      r.report =
          mpvi::mpai_solve(*setup, mpvi::matrix_game_oracle(r.game), r.config);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

}  // namespace

TEST_CASE("criterion 1: prox-oracle equivalence", "[acceptance]") {
  Timer timer;
  const std::vector<std::pair<const char*, mpvi::ProxSetupPtr>> setups = {
      {"ball", mpvi::make_euclidean_ball(6, 1.5)},
      {"simplex", mpvi::make_entropy_simplex(7)},
      {"product", mpvi::make_product({mpvi::make_entropy_simplex(5),
                                      mpvi::make_entropy_simplex(4)})}};
  bool pass = true;
  double worst = 0.0;
  mpvi::Rng rng(2024);
  for (const auto& [name, setup] : setups) {
    for (int i = 0; i < 1000; ++i) {
      const Vector anchor = setup->sample(rng);
      Vector s(setup->dim());
      for (int k = 0; k < setup->dim(); ++k) s[k] = 2.0 * rng.normal();
      const double L = std::exp(rng.uniform(-1.0, 1.5));
      const Vector p = setup->prox(anchor, s, L);
      const Vector ref = testing_oracles::numeric_prox(*setup, anchor, s, L);
      const double dist = setup->primal_norm(p - ref);
      worst = std::max(worst, dist);
      if (dist >= 1e-6) pass = false;
    }
  }
  const double elapsed = timer.seconds();
  pass = pass && elapsed < 60.0;
  std::ostringstream detail;
  detail << "worst distance " << worst;
  report(1, "prox-oracle equivalence", pass, elapsed, detail.str());
  CHECK(worst < 1e-6);
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 2: certificate soundness", "[acceptance]") {
  Timer timer;
  bool gap_ok = true;
  bool stop_ok = true;
  double worst_margin = -1e300;
  for (const auto& run : benchmark_runs()) {
    const double gap =
        mpvi::matrix_game_exact_gap(run.game, run.report.y_tilde);
    worst_margin = std::max(worst_margin, gap - run.report.general_estimate);
    if (gap > run.report.general_estimate + 1e-9) gap_ok = false;
    if (run.report.stop_reason != StopReason::kStoppingRuleMet ||
        run.report.general_estimate >
            run.config.epsilon +
                run.report.accumulated_error_term / run.report.S_N + 1e-12)
      stop_ok = false;
  }
  const double elapsed = timer.seconds();
  const bool pass = gap_ok && stop_ok && elapsed < 120.0;
  std::ostringstream detail;
  detail << "worst gap-estimate margin " << worst_margin;
  report(2, "certificate soundness", pass, elapsed, detail.str());
  CHECK(gap_ok);
  CHECK(stop_ok);
  CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 3: iteration bound", "[acceptance]") {
  Timer timer;
  bool pass = true;
  std::int64_t max_iters = 0;
  std::int64_t worst_bound = 0;
  for (const auto& run : benchmark_runs()) {
    const double L = mpvi::matrix_game_lipschitz(run.game);
    const double R2 = std::log(10.0) + std::log(10.0);
    if (std::abs(run.report.R_squared - R2) > 1e-12) pass = false;
    const auto bound = static_cast<std::int64_t>(
        std::ceil(2.0 * (2.0 * L) * R2 / run.config.epsilon));
    const auto iters = static_cast<std::int64_t>(run.report.records.size());
    max_iters = std::max(max_iters, iters);
    worst_bound = std::max(worst_bound, bound);
    if (run.report.stop_reason != StopReason::kStoppingRuleMet ||
        iters > bound)
      pass = false;
  }
  const double elapsed = timer.seconds();
  pass = pass && elapsed < 120.0;
  std::ostringstream detail;
  detail << "max iterations " << max_iters << " vs bound " << worst_bound;
  report(3, "iteration bound", pass, elapsed, detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 4: attempt bound", "[acceptance]") {
  Timer timer;
  bool pass = true;
  for (const auto& run : benchmark_runs())
    if (!mpvi::attempt_bound_check(run.report, run.config)) pass = false;
  report(4, "attempt bound", pass, timer.seconds());
  CHECK(pass);
}

TEST_CASE("criterion 5: trajectory estimate residual", "[acceptance]") {
  Timer timer;
  bool pass = true;
  double worst = 1e300;
  for (const auto& run : benchmark_runs()) {
    const auto setup = mpvi::matrix_game_setup(run.game);
    mpvi::Rng rng(run.game.seed ^ 0x9e3779b9ULL);
    for (int p = 0; p < 20; ++p) {
      const Vector probe = setup->sample(rng);
      double rhs = 0.0;
      const double residual = mpvi::trajectory_estimate_residual(
          run.report, probe, *setup, mpvi::matrix_game_oracle(run.game), &rhs);
      const double floor = -1e-8 * std::max(1.0, std::abs(rhs));
      worst = std::min(worst, residual);
      if (residual < floor) pass = false;
    }
  }
  std::ostringstream detail;
  detail << "min residual " << worst;
  report(5, "trajectory estimate residual", pass, timer.seconds(),
         detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 6: noise-comparison ordering", "[acceptance]") {
  Timer timer;
  mpvi::ExperimentSpec spec;
  spec.problem.kind = "game";
  spec.problem.n = 100;
  spec.problem.m = 100;
  spec.modes = {SolverMode::kMpai, SolverMode::kAdaptiveFixedDelta,
                SolverMode::kFixedStep};
  spec.epsilon = 1.0 / 100.0;
  spec.noise_delta = 1.0 / 300.0;
  spec.delta0 = 1e-9;  // MPAI's initial guess; baselines get the known bound
  spec.repetitions = 20;
  spec.seed_base = 1;
  const auto result = mpvi::run_experiment(spec);

  double mean_mpai = 0.0, mean_adaptive = 0.0, mean_fixed = 0.0;
  for (const auto& run : result.runs) {
    const double err = run.report.S_N > 0
                           ? run.report.accumulated_error_term / run.report.S_N
                           : 0.0;
    if (run.config.mode == SolverMode::kMpai) mean_mpai += err;
    if (run.config.mode == SolverMode::kAdaptiveFixedDelta)
      mean_adaptive += err;
    if (run.config.mode == SolverMode::kFixedStep) mean_fixed += err;
  }
  mean_mpai /= spec.repetitions;
  mean_adaptive /= spec.repetitions;
  mean_fixed /= spec.repetitions;

  const double elapsed = timer.seconds();
  const bool pass = mean_mpai <= mean_fixed &&
                    mean_mpai <= 1.05 * mean_adaptive && elapsed < 600.0;
  std::ostringstream detail;
  detail << "mean error terms: mpai " << mean_mpai << ", adaptive "
         << mean_adaptive << ", fixed " << mean_fixed;
  report(6, "noise-comparison ordering", pass, elapsed, detail.str());
  CHECK(mean_mpai <= mean_fixed);
  CHECK(mean_mpai <= 1.05 * mean_adaptive);
  CHECK(elapsed < 600.0);
}

TEST_CASE("criterion 7: experimental iterations beat theory", "[acceptance]") {
  Timer timer;
  bool pass = true;
  std::ostringstream detail;
  for (const double eps : {1.0 / 10.0, 1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0}) {
    double mean_iters = 0.0;
    double mean_theory = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const auto game = mpvi::generate_matrix_game(
          10, 10, mpvi::PayoffDistribution::kStandardNormal,
          1000 + static_cast<std::uint64_t>(rep));
      const auto setup = mpvi::matrix_game_setup(game);
      SolverConfig config;
      config.epsilon = eps;
      config.L0 = mpvi::matrix_game_lipschitz(game);
      config.delta0 = 1e-12;
      const auto report =
          mpvi::mpai_solve(*setup, mpvi::matrix_game_oracle(game), config);
      mean_iters += static_cast<double>(report.records.size()) / 50.0;
      mean_theory += std::ceil(2.0 * config.L0 * report.R_squared / eps) / 50.0;
    }
    if (mean_iters > mean_theory) pass = false;
    detail << "eps=" << eps << ": " << mean_iters << " vs " << mean_theory
           << "; ";
  }
  report(7, "experimental iterations beat theory", pass, timer.seconds(),
         detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 8: FTS desk-scale reproduction", "[acceptance]") {
  Timer timer;
  int reached = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto prob = mpvi::generate_fts(mpvi::FtsVariant::kBallDistances,
                                         100, 20, 5, seed);
    const auto setup = mpvi::fts_setup(prob);
    SolverConfig config;
    config.epsilon = 2e-3;
    config.L0 = 1.0;
    config.delta0 = 1.0 / 20.0;
    config.max_outer_iterations = 200;
    const auto report = mpvi::solve(*setup, mpvi::fts_oracle(prob), config);
    double S = 0.0, err = 0.0, best = 1e300;
    for (const auto& rec : report.records) {
      S += 1.0 / rec.L;
      err += mpvi::detail::certified_error(rec);
      best = std::min(best, (report.R_squared + err) / S);
    }
    if (best < 0.01) ++reached;
  }
  const double elapsed = timer.seconds();
  const bool pass = reached >= 18 && elapsed < 300.0;
  detail << reached << "/20 seeds reach < 0.01 within 200 iterations";
  report(8, "FTS desk-scale reproduction", pass, elapsed, detail.str());
  CHECK(reached >= 18);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 9: unit-ball centers regime", "[acceptance]") {
  Timer timer;
  bool monotone = true;
  bool reached = true;
  double final_best = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto prob = mpvi::generate_fts(mpvi::FtsVariant::kPointDistances,
                                         100, 50, 25, seed, true);
    const auto setup = mpvi::fts_setup(prob);
    SolverConfig config;
    config.epsilon = 0.05;
    config.L0 = 1.0;
    config.delta0 = 1.0 / 20.0;
    config.max_outer_iterations = 1000;
    config.start = mpvi::fts_sphere_start(prob);
    const auto report = mpvi::solve(*setup, mpvi::fts_oracle(prob), config);
    double S = 0.0, err = 0.0, prev = 1e300, best = 1e300;
    for (const auto& rec : report.records) {
      S += 1.0 / rec.L;
      err += mpvi::detail::certified_error(rec);
      const double est = (report.R_squared + err) / S;
      if (est > prev + 1e-12) monotone = false;
      prev = est;
      best = std::min(best, est);
    }
    if (best > 0.26) reached = false;
    final_best = std::max(final_best, best);
  }
  const bool pass = monotone && reached;
  std::ostringstream detail;
  detail << "worst best-estimate " << final_best << ", monotone "
         << (monotone ? "yes" : "no");
  report(9, "unit-ball centers regime", pass, timer.seconds(), detail.str());
  CHECK(monotone);
  CHECK(reached);
}

TEST_CASE("criterion 10: bounded-operator procedure", "[acceptance]") {
  Timer timer;
  auto b4_violations = [](const mpvi::RunReport& report, double eps) {
    int violations = 0;
    for (const auto& rec : report.records) {
      const double base_L = rec.L / std::pow(2.0, rec.inner_doublings);
      const double bound =
          2.0 * (1.0 + 16.0 * rec.delta * rec.delta / (base_L * eps));
      if (std::pow(2.0, rec.inner_doublings) > bound + 1e-9) ++violations;
    }
    return violations;
  };

  const auto interval = mpvi::make_euclidean_ball(Vector::Zero(1), 1.0);
  auto sign_oracle = [](const Vector& x) {
    Vector g(1);
    g[0] = x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0);
    return g;
  };
  SolverConfig sign_config;
  sign_config.epsilon = 0.1;
  sign_config.L0 = 1.0;
  sign_config.delta0 = 0.5;
  sign_config.start = Vector::Constant(1, 0.7);
  const auto sign_report =
      mpvi::solve_bounded_operator(*interval, sign_oracle, sign_config);

  const auto prob = mpvi::generate_fts(mpvi::FtsVariant::kPointDistances, 100,
                                       50, 25, 1, true);
  const auto setup = mpvi::fts_setup(prob);
  SolverConfig fts_config;
  fts_config.epsilon = 0.1;
  fts_config.L0 = 1.0;
  fts_config.delta0 = 0.5;
  const auto fts_report =
      mpvi::solve_bounded_operator(*setup, mpvi::fts_oracle(prob), fts_config);

  const bool sign_ok =
      sign_report.stop_reason == StopReason::kStoppingRuleMet &&
      sign_report.general_estimate <= sign_config.epsilon + 1e-12 &&
      b4_violations(sign_report, sign_config.epsilon) == 0;
  const bool fts_ok = fts_report.stop_reason == StopReason::kStoppingRuleMet &&
                      fts_report.general_estimate <=
                          fts_config.epsilon + 1e-12 &&
                      b4_violations(fts_report, fts_config.epsilon) == 0;
  const bool pass = sign_ok && fts_ok;
  std::ostringstream detail;
  detail << "sign estimate " << sign_report.general_estimate
         << ", fts estimate " << fts_report.general_estimate;
  report(10, "bounded-operator procedure", pass, timer.seconds(),
         detail.str());
  CHECK(sign_ok);
  CHECK(fts_ok);
}

TEST_CASE("criterion 11: CLI determinism", "[acceptance]") {
  Timer timer;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mpvi_acceptance";
  fs::create_directories(dir);

  auto run_compare = [&](const std::string& out) {
    std::ostringstream cmd;
    cmd << MPVI_CLI_PATH
        << " compare --problem game --n 10 --m 10 --eps 0.05 --delta0 1e-9"
        << " --noise 0.0033333 --seed 11 --reps 2"
        << " --mode mpai --mode adaptive --mode fixed"
        << " --out " << out << " > /dev/null";
    return std::system(cmd.str().c_str());
  };
  auto strip_seconds = [](const fs::path& p) {
    std::ifstream in(p);
    std::string out, line;
    while (std::getline(in, line)) {
      out += line.substr(0, line.rfind(','));
      out.push_back('\n');
    }
    return out;
  };

  const fs::path a = dir / "a.csv";
  const fs::path b = dir / "b.csv";
  const bool ran = run_compare(a.string()) == 0 && run_compare(b.string()) == 0;
  const bool identical = ran && strip_seconds(a) == strip_seconds(b) &&
                         !strip_seconds(a).empty();
  report(11, "CLI determinism", identical, timer.seconds());
  CHECK(ran);
  CHECK(identical);
}
