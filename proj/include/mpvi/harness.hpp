#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpvi/fts.hpp"
#include "mpvi/matrix_game.hpp"
#include "mpvi/noise.hpp"
#include "mpvi/serialization.hpp"
#include "mpvi/solver.hpp"

namespace mpvi {

// Benchmark problem descriptor; `kind` is one of game, fts, fts-points,
// fts-unitball. Instances are regenerated from the seed unless a materialized
// instance document is supplied.
struct ProblemSpec {
  std::string kind = "game";
  int n = 10;
  int m = 10;
  int centers = 5;
  PayoffDistribution distribution = PayoffDistribution::kStandardNormal;
  std::uint64_t seed = 1;
};

inline json problem_spec_to_json(const ProblemSpec& spec) {
  json j;
  j["problem"] = spec.kind;
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["centers"] = spec.centers;
  j["distribution"] = distribution_name(spec.distribution);
  j["seed"] = spec.seed;
  return j;
}

inline ProblemSpec problem_spec_from_json(const json& j) {
  ProblemSpec spec;
  spec.kind = j.at("problem");
  spec.n = j.value("n", spec.n);
  spec.m = j.value("m", spec.m);
  spec.centers = j.value("centers", spec.centers);
  if (j.contains("distribution"))
    spec.distribution = distribution_from_name(j.at("distribution"));
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

// A problem instance wired to its prox geometry and exact operator. The
// instance is shared with the closures, so the struct moves and copies
// freely.
struct BuiltProblem {
  ProblemSpec spec;
  std::shared_ptr<const MatrixGame> game;  // exactly one of these is set
  std::shared_ptr<const FtsProblem> fts;
  ProxSetupPtr setup;
  std::function<Vector(const Vector&)> oracle;
  // max |A_ij| for games; 0 when no operator constant is known.
  double known_lipschitz = 0.0;
  // Exact duality gap at a stacked point; games only.
  std::function<double(const Vector&)> exact_gap;

  bool is_game() const { return game != nullptr; }
};

inline BuiltProblem wire_problem(ProblemSpec spec, MatrixGame game_instance) {
  BuiltProblem built;
  built.spec = std::move(spec);
  built.game = std::make_shared<const MatrixGame>(std::move(game_instance));
  built.setup = matrix_game_setup(*built.game);
  built.known_lipschitz = matrix_game_lipschitz(*built.game);
  const auto g = built.game;
  built.oracle = [g](const Vector& u) { return matrix_game_operator(*g, u); };
  built.exact_gap = [g](const Vector& u) {
    return matrix_game_exact_gap(*g, u);
  };
  return built;
}

inline BuiltProblem wire_problem(ProblemSpec spec, FtsProblem fts_instance) {
  BuiltProblem built;
  built.spec = std::move(spec);
  built.fts = std::make_shared<const FtsProblem>(std::move(fts_instance));
  built.setup = fts_setup(*built.fts);
  const auto p = built.fts;
  built.oracle = [p](const Vector& u) { return fts_vi_operator(*p, u); };
  return built;
}

inline BuiltProblem build_problem(const ProblemSpec& spec) {
  if (spec.kind == "game")
    return wire_problem(spec, generate_matrix_game(spec.n, spec.m,
                                                   spec.distribution,
                                                   spec.seed));
  if (spec.kind == "fts")
    return wire_problem(spec,
                        generate_fts(FtsVariant::kBallDistances, spec.n,
                                     spec.m, spec.centers, spec.seed));
  if (spec.kind == "fts-points")
    return wire_problem(spec,
                        generate_fts(FtsVariant::kPointDistances, spec.n,
                                     spec.m, spec.centers, spec.seed));
  if (spec.kind == "fts-unitball")
    return wire_problem(spec,
                        generate_fts(FtsVariant::kPointDistances, spec.n,
                                     spec.m, spec.centers, spec.seed, true));
  throw std::invalid_argument("unknown problem kind: " + spec.kind);
}

inline BuiltProblem build_problem_from_instance(const json& instance) {
  ProblemSpec spec = problem_spec_from_json(instance);
  if (spec.kind == "game")
    return wire_problem(std::move(spec), matrix_game_from_json(instance));
  return wire_problem(std::move(spec), fts_from_json(instance));
}

inline json instance_document(const BuiltProblem& built, bool materialize) {
  if (built.is_game())
    return instance_to_json(*built.game, materialize);
  return instance_to_json(*built.fts, materialize);
}

enum class StartKind { kDgfMin, kSphere };

inline const char* start_name(StartKind s) {
  return s == StartKind::kDgfMin ? "min" : "sphere";
}

inline StartKind start_from_name(const std::string& name) {
  if (name == "min") return StartKind::kDgfMin;
  if (name == "sphere") return StartKind::kSphere;
  throw std::invalid_argument("unknown start kind: " + name);
}

struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<SolverMode> modes = {SolverMode::kMpai};
  double epsilon = 1e-2;
  double L0 = 0.0;  // <= 0 selects max|A_ij| for games, 1.0 otherwise
  double delta0 = 0.0;
  std::int64_t max_outer_iterations = 100000;
  std::int64_t max_total_attempts = 400064;
  double noise_delta = 0.0;
  int repetitions = 1;
  std::uint64_t seed_base = 1;
  StartKind start = StartKind::kDgfMin;
  std::string output_path;  // CSV path; empty writes nothing
};

inline json experiment_spec_to_json(const ExperimentSpec& spec) {
  json j = problem_spec_to_json(spec.problem);
  json modes = json::array();
  for (auto m : spec.modes) modes.push_back(mode_name(m));
  j["mode"] = std::move(modes);
  j["eps"] = spec.epsilon;
  j["l0"] = spec.L0;
  j["delta0"] = spec.delta0;
  j["max_iterations"] = spec.max_outer_iterations;
  j["max_attempts"] = spec.max_total_attempts;
  j["noise"] = spec.noise_delta;
  j["reps"] = spec.repetitions;
  j["seed"] = spec.seed_base;
  j["x0"] = start_name(spec.start);
  j["out"] = spec.output_path;
  return j;
}

// Flat document with the same field names as the CLI flags.
inline ExperimentSpec experiment_spec_from_json(const json& j) {
  ExperimentSpec spec;
  spec.problem = problem_spec_from_json(j);
  if (j.contains("mode")) {
    spec.modes.clear();
    if (j.at("mode").is_array())
      for (const auto& m : j.at("mode"))
        spec.modes.push_back(mode_from_name(m));
    else
      spec.modes.push_back(mode_from_name(j.at("mode")));
  }
  spec.epsilon = j.value("eps", spec.epsilon);
  spec.L0 = j.value("l0", spec.L0);
  spec.delta0 = j.value("delta0", spec.delta0);
  spec.max_outer_iterations =
      j.value("max_iterations", spec.max_outer_iterations);
  spec.max_total_attempts = j.value("max_attempts", spec.max_total_attempts);
  spec.noise_delta = j.value("noise", spec.noise_delta);
  spec.repetitions = j.value("reps", spec.repetitions);
  spec.seed_base = j.value("seed", spec.seed_base);
  if (j.contains("x0")) spec.start = start_from_name(j.at("x0"));
  spec.output_path = j.value("out", spec.output_path);
  return spec;
}

struct CsvRow {
  std::int64_t iteration = 0;
  std::string mode;
  double general_estimate = 0.0;
  double error_term = 0.0;
  std::optional<double> exact_gap;
  std::int64_t attempts_cum = 0;
  double L = 0.0;
  double delta = 0.0;
  double seconds = 0.0;
};

// One solver execution with everything needed to replay it exactly.
struct RunArtifact {
  int repetition = 0;
  json instance;  // instance document (parameters + seed)
  SolverConfig config;
  double noise_delta = 0.0;
  std::uint64_t noise_seed = 0;
  StartKind start = StartKind::kDgfMin;
  std::int64_t n_theory = 0;
  RunReport report;
};

struct ExperimentResult {
  std::vector<CsvRow> rows;
  std::vector<RunArtifact> runs;
  json summary;
};

// Checkpoint policy: every iteration for runs of at most 1000 iterations,
// otherwise geometric checkpoints growing by 1.1x, always including the last.
inline std::vector<std::int64_t> checkpoint_iterations(std::int64_t n) {
  std::vector<std::int64_t> cps;
  if (n <= 0) return cps;
  if (n <= 1000) {
    cps.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 1; i <= n; ++i) cps.push_back(i);
    return cps;
  }
  std::int64_t next = 1;
  while (next < n) {
    cps.push_back(next);
    next = std::max(next + 1,
                    static_cast<std::int64_t>(std::ceil(1.1 * static_cast<double>(next))));
  }
  cps.push_back(n);
  return cps;
}

// Prefix quantities after each checkpoint: the certified estimate, the
// normalized error term, and (for games) the exact gap at the running
// weighted average.
inline std::vector<CsvRow> checkpoint_rows(
    const RunReport& report, const std::string& mode,
    const std::function<double(const Vector&)>& exact_gap) {
  std::vector<CsvRow> rows;
  const auto cps =
      checkpoint_iterations(static_cast<std::int64_t>(report.records.size()));
  if (cps.empty()) return rows;
  rows.reserve(cps.size());
  double S = 0.0;
  double err = 0.0;
  std::int64_t attempts = 0;
  Vector y_weighted = Vector::Zero(report.x0.size());
  std::size_t next_cp = 0;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& rec = report.records[i];
    S += 1.0 / rec.L;
    err += detail::certified_error(rec);
    attempts += rec.attempts + rec.inner_doublings;
    y_weighted += rec.y / rec.L;
    const std::int64_t iteration = static_cast<std::int64_t>(i) + 1;
    if (next_cp < cps.size() && cps[next_cp] == iteration) {
      ++next_cp;
      CsvRow row;
      row.iteration = iteration;
      row.mode = mode;
      row.general_estimate = (report.R_squared + err) / S;
      row.error_term = err / S;
      if (exact_gap) row.exact_gap = exact_gap(y_weighted / S);
      row.attempts_cum = attempts;
      row.L = rec.L;
      row.delta = rec.delta;
      row.seconds = rec.seconds;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Shortest round-trip decimal form; keeps CSV output byte-deterministic.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader =
    "iteration,mode,general_estimate,error_term,exact_gap,attempts_cum,"
    "L_accepted,delta_accepted,seconds";

inline std::string to_csv(const std::vector<CsvRow>& rows) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const auto& row : rows) {
    out += std::to_string(row.iteration);
    out.push_back(',');
    out += row.mode;
    out.push_back(',');
    out += format_double(row.general_estimate);
    out.push_back(',');
    out += format_double(row.error_term);
    out.push_back(',');
    if (row.exact_gap) out += format_double(*row.exact_gap);
    out.push_back(',');
    out += std::to_string(row.attempts_cum);
    out.push_back(',');
    out += format_double(row.L);
    out.push_back(',');
    out += format_double(row.delta);
    out.push_back(',');
    out += format_double(row.seconds);
    out.push_back('\n');
  }
  return out;
}

inline double auto_L0(const BuiltProblem& built, double requested) {
  if (requested > 0.0) return requested;
  return built.known_lipschitz > 0.0 ? built.known_lipschitz : 1.0;
}

// Theoretical iteration overlay ceil(2 L R^2 / eps), using the known operator
// constant when the problem provides one and the largest accepted L
// otherwise.
inline std::int64_t theoretical_iterations(const BuiltProblem& built,
                                           const RunReport& report) {
  double L_ref = built.known_lipschitz;
  if (L_ref <= 0.0)
    for (const auto& rec : report.records) L_ref = std::max(L_ref, rec.L);
  if (L_ref <= 0.0) return 0;
  return static_cast<std::int64_t>(
      std::ceil(2.0 * L_ref * report.R_squared / report.epsilon));
}

inline json run_artifact_to_json(const RunArtifact& run) {
  json j;
  j["format"] = "mpvi-report";
  j["version"] = 1;
  j["rng"] = kRngName;
  j["repetition"] = run.repetition;
  j["instance"] = run.instance;
  j["config"] = config_to_json(run.config);
  j["noise"] = {{"delta", run.noise_delta}, {"seed", run.noise_seed}};
  j["start"] = start_name(run.start);
  j["n_theory"] = run.n_theory;
  j["result"] = report_to_json(run.report);
  return j;
}

// Re-executes the run described by a report document. Instances, noise
// streams and the solve itself are deterministic, so the replay reproduces
// the stored trajectory exactly.
inline RunReport replay_run(const json& doc, BuiltProblem* built_out = nullptr) {
  BuiltProblem built = build_problem_from_instance(doc.at("instance"));
  SolverConfig config = config_from_json(doc.at("config"));
  if (start_from_name(doc.at("start")) == StartKind::kSphere) {
    if (built.is_game())
      throw std::invalid_argument("sphere start applies to fts problems");
    config.start = fts_sphere_start(*built.fts);
  }
  const double noise_delta = doc.at("noise").at("delta");
  RunReport report;
  if (noise_delta > 0.0) {
    NoisyOracle oracle(built.oracle, built.setup, noise_delta,
                       doc.at("noise").at("seed"));
    report = solve(*built.setup, oracle, config);
  } else {
    report = solve(*built.setup, built.oracle, config);
  }
  if (built_out) *built_out = std::move(built);
  return report;
}

namespace detail {

struct Aggregate {
  double sum = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  std::int64_t count = 0;

  void add(double v) {
    sum += v;
    max = std::max(max, v);
    ++count;
  }
  json to_json() const {
    return {{"mean", count ? sum / static_cast<double>(count) : 0.0},
            {"max", count ? max : 0.0}};
  }
};

}  // namespace detail

// Executes every requested mode on identically seeded instances and noise
// streams, one repetition per derived seed. Emits one CSV row per logged
// checkpoint and per-run report documents; repetition i uses instance seed
// seed_base + i, and all modes of a repetition share one noise seed so they
// consume the same noise realization per query index.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.repetitions < 1)
    throw std::invalid_argument("repetitions must be >= 1");
  if (spec.modes.empty())
    throw std::invalid_argument("at least one solver mode required");

  ExperimentResult result;
  detail::Aggregate estimate_agg, error_agg;
  json per_mode = json::object();
  for (auto mode : spec.modes) {
    per_mode[mode_name(mode)] = {{"final_general_estimate", json::object()},
                                 {"final_error_term", json::object()},
                                 {"iterations", json::object()},
                                 {"runs", json::array()}};
  }
  std::map<std::string, detail::Aggregate> agg_estimate, agg_error, agg_iters;

  for (int rep = 0; rep < spec.repetitions; ++rep) {
    ProblemSpec prob_spec = spec.problem;
    prob_spec.seed = spec.seed_base + static_cast<std::uint64_t>(rep);
    BuiltProblem built = build_problem(prob_spec);
    const std::uint64_t noise_seed = derive_seed(prob_spec.seed, 0x6e6f6973);

    for (auto mode : spec.modes) {
      SolverConfig config;
      config.epsilon = spec.epsilon;
      config.L0 = auto_L0(built, spec.L0);
      // The baselines interpret delta as the known inexactness bound, which
      // for injected noise is the noise level itself; the adaptive modes
      // treat spec.delta0 as their initial guess.
      const bool fixed_delta_mode = mode == SolverMode::kAdaptiveFixedDelta ||
                                    mode == SolverMode::kFixedStep;
      config.delta0 = fixed_delta_mode && spec.noise_delta > 0.0
                          ? spec.noise_delta
                          : spec.delta0;
      config.max_outer_iterations = spec.max_outer_iterations;
      config.max_total_attempts = spec.max_total_attempts;
      config.mode = mode;
      if (spec.start == StartKind::kSphere) {
        if (built.is_game())
          throw std::invalid_argument("sphere start applies to fts problems");
        config.start = fts_sphere_start(*built.fts);
      }

      RunReport report;
      if (spec.noise_delta > 0.0) {
        NoisyOracle oracle(built.oracle, built.setup, spec.noise_delta,
                           noise_seed);
        report = solve(*built.setup, oracle, config);
      } else {
        report = solve(*built.setup, built.oracle, config);
      }

      auto rows = checkpoint_rows(report, mode_name(mode), built.exact_gap);
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());

      RunArtifact run;
      run.repetition = rep;
      run.instance = instance_document(built, false);
      run.config = config;
      run.noise_delta = spec.noise_delta;
      run.noise_seed = noise_seed;
      run.start = spec.start;
      run.n_theory = theoretical_iterations(built, report);
      run.report = std::move(report);

      const std::string name = mode_name(mode);
      agg_estimate[name].add(run.report.general_estimate);
      agg_error[name].add(run.report.S_N > 0.0
                              ? run.report.accumulated_error_term /
                                    run.report.S_N
                              : 0.0);
      agg_iters[name].add(static_cast<double>(run.report.records.size()));
      per_mode[name]["runs"].push_back(
          {{"repetition", rep},
           {"iterations", run.report.records.size()},
           {"total_attempts", run.report.total_attempts},
           {"general_estimate", run.report.general_estimate},
           {"n_theory", run.n_theory},
           {"stop_reason", stop_reason_name(run.report.stop_reason)},
           {"solve_seconds", run.report.solve_seconds}});
      result.runs.push_back(std::move(run));
    }
  }

  for (auto mode : spec.modes) {
    const std::string name = mode_name(mode);
    per_mode[name]["final_general_estimate"] = agg_estimate[name].to_json();
    per_mode[name]["final_error_term"] = agg_error[name].to_json();
    per_mode[name]["iterations"] = agg_iters[name].to_json();
  }
  result.summary = {{"spec", experiment_spec_to_json(spec)},
                    {"modes", std::move(per_mode)}};

  if (!spec.output_path.empty()) {
    std::string stem = spec.output_path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
      stem.resize(stem.size() - 4);
    {
      std::ofstream csv(spec.output_path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot open " + spec.output_path);
      csv << to_csv(result.rows);
    }
    {
      json reports = json::array();
      for (const auto& run : result.runs)
        reports.push_back(run_artifact_to_json(run));
      std::ofstream out(stem + ".reports.json", std::ios::binary);
      out << reports.dump(2) << '\n';
    }
    {
      std::ofstream out(stem + ".summary.json", std::ios::binary);
      out << result.summary.dump(2) << '\n';
    }
  }
  return result;
}

}  // namespace mpvi
