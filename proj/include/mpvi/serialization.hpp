#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>

#include "mpvi/fts.hpp"
#include "mpvi/matrix_game.hpp"
#include "mpvi/solver.hpp"

namespace mpvi {

using nlohmann::json;

inline const char* distribution_name(PayoffDistribution d) {
  return d == PayoffDistribution::kStandardNormal ? "normal" : "uniform";
}

inline PayoffDistribution distribution_from_name(const std::string& name) {
  if (name == "normal") return PayoffDistribution::kStandardNormal;
  if (name == "uniform") return PayoffDistribution::kUniformSymmetric;
  throw std::invalid_argument("unknown payoff distribution: " + name);
}

inline SolverMode mode_from_name(const std::string& name) {
  if (name == "mpai") return SolverMode::kMpai;
  if (name == "adaptive") return SolverMode::kAdaptiveFixedDelta;
  if (name == "fixed") return SolverMode::kFixedStep;
  if (name == "bounded") return SolverMode::kBoundedOperator;
  throw std::invalid_argument("unknown solver mode: " + name);
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXd();
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols)
      throw std::invalid_argument("ragged matrix in JSON");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k);
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i);
  return v;
}

// Instance documents carry the generator name, all parameters and the seed;
// matrices are materialized only on request. Parameters and seed round-trip
// bit-exactly.
inline json instance_to_json(const MatrixGame& game, bool materialize) {
  json j;
  j["format"] = "mpvi-instance";
  j["version"] = 1;
  j["rng"] = kRngName;
  j["problem"] = "game";
  j["n"] = game.rows();
  j["m"] = game.cols();
  j["distribution"] = distribution_name(game.distribution);
  j["seed"] = game.seed;
  if (materialize) j["payoff"] = matrix_to_json(game.payoff);
  return j;
}

inline MatrixGame matrix_game_from_json(const json& j) {
  const auto dist = distribution_from_name(j.at("distribution"));
  const std::uint64_t seed = j.at("seed");
  if (j.contains("payoff")) {
    MatrixGame game;
    game.seed = seed;
    game.distribution = dist;
    game.payoff = matrix_from_json(j.at("payoff"));
    if (!game.payoff.allFinite())
      throw std::invalid_argument("payoff matrix has non-finite entries");
    return game;
  }
  return generate_matrix_game(j.at("n"), j.at("m"), dist, seed);
}

inline const char* fts_kind_name(const FtsProblem& prob) {
  if (prob.variant == FtsVariant::kBallDistances) return "fts";
  return prob.unit_ball_centers ? "fts-unitball" : "fts-points";
}

inline json instance_to_json(const FtsProblem& prob, bool materialize) {
  json j;
  j["format"] = "mpvi-instance";
  j["version"] = 1;
  j["rng"] = kRngName;
  j["problem"] = fts_kind_name(prob);
  j["n"] = prob.space_dim();
  j["m"] = prob.num_constraints();
  j["centers"] = prob.num_centers();
  j["seed"] = prob.seed;
  if (materialize) {
    j["center_matrix"] = matrix_to_json(prob.centers);
    j["radii"] = vector_to_json(prob.radii);
    j["constraint_matrix"] = matrix_to_json(prob.constraints);
  }
  return j;
}

inline FtsProblem fts_from_json(const json& j) {
  const std::string kind = j.at("problem");
  const FtsVariant variant = kind == "fts" ? FtsVariant::kBallDistances
                                           : FtsVariant::kPointDistances;
  const bool unit_ball = kind == "fts-unitball";
  const std::uint64_t seed = j.at("seed");
  if (j.contains("center_matrix")) {
    FtsProblem prob;
    prob.variant = variant;
    prob.unit_ball_centers = unit_ball;
    prob.seed = seed;
    prob.centers = matrix_from_json(j.at("center_matrix"));
    prob.radii = vector_from_json(j.at("radii"));
    prob.constraints = matrix_from_json(j.at("constraint_matrix"));
    return prob;
  }
  return generate_fts(variant, j.at("n"), j.at("m"), j.at("centers"), seed,
                      unit_ball);
}

inline json config_to_json(const SolverConfig& config) {
  json j;
  j["epsilon"] = config.epsilon;
  j["L0"] = config.L0;
  j["delta0"] = config.delta0;
  j["max_outer_iterations"] = config.max_outer_iterations;
  j["max_total_attempts"] = config.max_total_attempts;
  j["mode"] = mode_name(config.mode);
  return j;
}

inline SolverConfig config_from_json(const json& j) {
  SolverConfig config;
  config.epsilon = j.at("epsilon");
  config.L0 = j.at("L0");
  config.delta0 = j.at("delta0");
  config.max_outer_iterations = j.at("max_outer_iterations");
  config.max_total_attempts = j.at("max_total_attempts");
  config.mode = mode_from_name(j.at("mode"));
  return config;
}

// Per-iteration scalars plus the start point and the averaged solution. The
// full point trajectory is not stored; verification replays the run from the
// recorded seeds instead.
inline json report_to_json(const RunReport& report) {
  json j;
  j["mode"] = mode_name(report.mode);
  j["epsilon"] = report.epsilon;
  j["stop_reason"] = stop_reason_name(report.stop_reason);
  j["iterations"] = report.records.size();
  j["total_attempts"] = report.total_attempts;
  j["S_N"] = report.S_N;
  j["R_squared"] = report.R_squared;
  j["general_estimate"] = report.general_estimate;
  j["accumulated_error_term"] = report.accumulated_error_term;
  j["solve_seconds"] = report.solve_seconds;
  j["x0"] = vector_to_json(report.x0);
  j["y_tilde"] = vector_to_json(report.y_tilde);
  json records = json::array();
  for (const auto& rec : report.records) {
    json r;
    r["k"] = rec.index;
    r["L"] = rec.L;
    r["delta"] = rec.delta;
    r["attempts"] = rec.attempts;
    r["step_norm"] = rec.step_norm;
    r["step_error_term"] = rec.step_error_term;
    r["inner_doublings"] = rec.inner_doublings;
    r["smooth_stop"] = rec.smooth_stop;
    r["seconds"] = rec.seconds;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

}  // namespace mpvi
