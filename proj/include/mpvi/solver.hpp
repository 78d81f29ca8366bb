#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mpvi/prox_setup.hpp"

namespace mpvi {

// Solver variants. Mpai adapts both the smoothness constant L and the
// inexactness level delta; AdaptiveFixedDelta adapts L only, with delta held
// at a known bound; FixedStep runs classic extragradient steps of size 1/L
// with no acceptance test; BoundedOperator augments Mpai with an inner
// doubling pass designed for bounded non-smooth operators.
enum class SolverMode { kMpai, kAdaptiveFixedDelta, kFixedStep, kBoundedOperator };

enum class StopReason { kStoppingRuleMet, kIterationBudget, kAttemptBudget };

struct SolverConfig {
  double epsilon = 1e-2;   // target accuracy for the certified estimate
  double L0 = 1.0;         // initial guess for the smoothness constant
  double delta0 = 0.0;     // initial guess for the inexactness level
  std::int64_t max_outer_iterations = 100000;
  // 4N plus log-term headroom covers the worst-case line-search cost.
  std::int64_t max_total_attempts = 400064;
  SolverMode mode = SolverMode::kMpai;
  // Optional start overriding the d.g.f. minimizer. R^2 is recomputed for the
  // actual start, so certificates remain valid.
  std::optional<Vector> start;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(L0 > 0.0)) throw std::invalid_argument("L0 must be positive");
    if (!(delta0 >= 0.0)) throw std::invalid_argument("delta0 must be nonnegative");
    if (max_outer_iterations < 1 || max_total_attempts < 1)
      throw std::invalid_argument("budgets must be >= 1");
  }
};

// One accepted outer iteration. x_prev is the iterate the step started from,
// y the extragradient point, x_next the new iterate.
struct IterationRecord {
  std::int64_t index = 0;
  double L = 0.0;       // accepted L^{k+1}
  double delta = 0.0;   // accepted delta^{k+1}
  Vector x_prev, y, x_next;
  int attempts = 1;     // prox-pair solves consumed by the line search
  double step_norm = 0.0;        // primal_norm(y - x_next)
  double step_error_term = 0.0;  // (delta / L) * step_norm
  // BoundedOperator bookkeeping: number of inner doublings and whether the
  // inner loop exited through the smoothness test (in which case the step
  // contributes no certified error).
  int inner_doublings = 0;
  bool smooth_stop = false;
  double seconds = 0.0;  // elapsed since solve start; excluded from hashes
};

struct RunReport {
  SolverMode mode = SolverMode::kMpai;
  double epsilon = 0.0;
  Vector x0;
  double R_squared = 0.0;  // max_x V(x, x0)
  std::vector<IterationRecord> records;
  double S_N = 0.0;   // sum over records of 1 / L^{k+1}
  Vector y_tilde;     // (1 / S_N) * sum of y^{k+1} / L^{k+1}
  // Sum of certified per-step error contributions (delta/L * step_norm, with
  // smooth-stop bounded-mode steps contributing zero).
  double accumulated_error_term = 0.0;
  double general_estimate = std::numeric_limits<double>::infinity();
  std::int64_t total_attempts = 0;
  StopReason stop_reason = StopReason::kIterationBudget;
  double solve_seconds = 0.0;
};

struct LineSearchOptions {
  std::int64_t max_attempts = 200;
  // false: hold delta fixed and double only L (the L-adaptive baseline).
  bool adapt_delta = true;
  // Scale used to seed delta when delta0 == 0 stalls the search; 0 derives
  // it from the operator value at the current iterate.
  double delta_reseed = 0.0;
};

struct LineSearchResult {
  bool accepted = false;
  Vector y, x_next;
  double L = 0.0;
  double delta = 0.0;
  int attempts = 0;
  Vector g_x, g_y;  // operator values at x_prev and at the accepted y
};

// One adaptive step: from x, try (L_try, delta_try), compute the prox pair
//
//   y = prox(x, g(x), L),   x_next = prox(x, g(y), L),
//
// and accept once the inexactness inequality
//
//   <g(y) - g(x), y - x_next> <=
//       L V(y, x) + L V(x_next, y) + delta * primal_norm(y - x_next)
//
// holds (ties accept). Each rejection doubles L, and delta too when
// adapt_delta is set. g(x) is evaluated once and reused across attempts;
// g(y) is re-evaluated per attempt. When the search runs out of attempts the
// result carries the last tried state with accepted == false.
template <class Oracle>
LineSearchResult mpai_line_search(const ProxSetup& setup, Oracle&& oracle,
                                  const Vector& x, double L_try,
                                  double delta_try,
                                  const LineSearchOptions& opts = {}) {
  if (!(L_try > 0.0))
    throw std::invalid_argument("line search: L_try must be positive");
  LineSearchResult res;
  res.g_x = oracle(x);
  res.L = L_try;
  res.delta = delta_try;
  const double L_start = L_try;
  int doublings_at_zero_delta = 0;
  while (res.attempts < opts.max_attempts) {
    ++res.attempts;
    res.y = setup.prox(x, res.g_x, res.L);
    res.g_y = oracle(res.y);
    res.x_next = setup.prox(x, res.g_y, res.L);
    const double lhs = (res.g_y - res.g_x).dot(res.y - res.x_next);
    const double rhs = res.L * (setup.bregman(res.y, x) +
                                setup.bregman(res.x_next, res.y)) +
                       res.delta * setup.primal_norm(res.y - res.x_next);
    if (lhs <= rhs) {
      res.accepted = true;
      return res;
    }
    if (opts.adapt_delta && res.delta == 0.0) {
      // Doubling zero stays zero, which a genuinely noisy oracle can never
      // satisfy. After 60 doublings of L alone, seed delta at machine-epsilon
      // scale and restart this iteration's search.
      if (++doublings_at_zero_delta >= 60) {
        res.delta = opts.delta_reseed > 0.0
                        ? opts.delta_reseed
                        : 1e-15 * setup.dual_norm(res.g_x) + 1e-300;
        res.L = L_start;
        continue;
      }
    } else if (opts.adapt_delta) {
      res.delta *= 2.0;
    }
    res.L *= 2.0;
  }
  return res;
}

namespace detail {

inline double certified_error(const IterationRecord& rec) {
  return rec.smooth_stop ? 0.0 : (rec.delta / rec.L) * rec.step_norm;
}

}  // namespace detail

// Runs the solver configured by `config` on the variational inequality with
// operator `oracle` over `setup`. Every outer iteration halves the previously
// accepted (L, delta) before the line search, appends a record, and stops
// once S_N = sum 1/L^{k+1} reaches R^2 / epsilon (2 R^2 / epsilon in
// BoundedOperator mode, whose certificate budgets epsilon/2 for the error
// part). Budget exhaustion is reported through stop_reason, never thrown.
template <class Oracle>
RunReport solve(const ProxSetup& setup, Oracle&& oracle,
                const SolverConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  RunReport report;
  report.mode = config.mode;
  report.epsilon = config.epsilon;
  report.x0 = config.start ? *config.start : setup.initial_point();
  if (!setup.contains(report.x0))
    throw std::invalid_argument("solve: start point infeasible");
  report.R_squared = setup.omega_radius_squared(report.x0);
  report.stop_reason = StopReason::kIterationBudget;

  const double target_S =
      (config.mode == SolverMode::kBoundedOperator ? 2.0 : 1.0) *
      report.R_squared / config.epsilon;

  Vector x = report.x0;
  Vector y_weighted = Vector::Zero(setup.dim());
  double L_accepted = config.L0;
  double delta_accepted = config.delta0;
  double delta_reseed = 0.0;

  while (static_cast<std::int64_t>(report.records.size()) <
         config.max_outer_iterations) {
    if (report.total_attempts >= config.max_total_attempts) {
      report.stop_reason = StopReason::kAttemptBudget;
      break;
    }

    LineSearchResult step;
    if (config.mode == SolverMode::kFixedStep) {
      // Plain extragradient with constant step 1/L0; no acceptance test.
      step.g_x = oracle(x);
      step.L = config.L0;
      step.delta = config.delta0;
      step.y = setup.prox(x, step.g_x, step.L);
      step.g_y = oracle(step.y);
      step.x_next = setup.prox(x, step.g_y, step.L);
      step.attempts = 1;
      step.accepted = true;
    } else {
      LineSearchOptions opts;
      opts.max_attempts = config.max_total_attempts - report.total_attempts;
      opts.adapt_delta = config.mode != SolverMode::kAdaptiveFixedDelta;
      opts.delta_reseed = delta_reseed;
      const double L_try = L_accepted / 2.0;
      const double delta_try = opts.adapt_delta ? delta_accepted / 2.0
                                                : config.delta0;
      step = mpai_line_search(setup, oracle, x, L_try, delta_try, opts);
      if (!step.accepted) {
        report.total_attempts += step.attempts;
        report.stop_reason = StopReason::kAttemptBudget;
        break;
      }
    }
    report.total_attempts += step.attempts;
    if (report.records.empty())
      delta_reseed = 1e-15 * setup.dual_norm(step.g_x) + 1e-300;

    IterationRecord rec;
    rec.index = static_cast<std::int64_t>(report.records.size());
    rec.attempts = step.attempts;

    if (config.mode == SolverMode::kBoundedOperator) {
      // Inner pass for bounded operators: with delta^{k+1} frozen, keep
      // doubling L^{k+1} and recomputing the prox pair until either the error
      // part is already small enough,
      //     delta^{k+1} * ||y - x_next|| <= epsilon / 2,
      // or the step behaves like a smooth one,
      //     <g(y) - g(x), y - x_next> <=
      //         (L^{k+1}/2) (||y - x||^2 + ||y - x_next||^2),
      // in which case it contributes no certified error at all.
      bool budget_hit = false;
      while (true) {
        const double step_norm = setup.primal_norm(step.y - step.x_next);
        if (step.delta * step_norm <= config.epsilon / 2.0) break;
        const double lhs = (step.g_y - step.g_x).dot(step.y - step.x_next);
        const double y_dist = setup.primal_norm(step.y - x);
        const double rhs =
            0.5 * step.L * (y_dist * y_dist + step_norm * step_norm);
        if (lhs <= rhs) {
          rec.smooth_stop = true;
          break;
        }
        if (report.total_attempts >= config.max_total_attempts) {
          budget_hit = true;
          break;
        }
        step.L *= 2.0;
        ++rec.inner_doublings;
        ++report.total_attempts;
        step.y = setup.prox(x, step.g_x, step.L);
        step.g_y = oracle(step.y);
        step.x_next = setup.prox(x, step.g_y, step.L);
      }
      if (budget_hit) {
        report.stop_reason = StopReason::kAttemptBudget;
        break;
      }
    }

    rec.L = step.L;
    rec.delta = step.delta;
    rec.x_prev = x;
    rec.y = step.y;
    rec.x_next = step.x_next;
    rec.step_norm = setup.primal_norm(step.y - step.x_next);
    rec.step_error_term = (rec.delta / rec.L) * rec.step_norm;
    rec.seconds = elapsed();

    report.S_N += 1.0 / rec.L;
    y_weighted += step.y / rec.L;
    report.accumulated_error_term += detail::certified_error(rec);
    report.records.push_back(std::move(rec));

    x = step.x_next;
    L_accepted = step.L;
    delta_accepted = config.mode == SolverMode::kAdaptiveFixedDelta
                         ? config.delta0
                         : step.delta;

    if (report.S_N >= target_S) {
      report.stop_reason = StopReason::kStoppingRuleMet;
      break;
    }
  }

  if (report.S_N > 0.0) {
    report.y_tilde = y_weighted / report.S_N;
    report.general_estimate =
        (report.R_squared + report.accumulated_error_term) / report.S_N;
  } else {
    report.y_tilde = report.x0;
  }
  report.solve_seconds = elapsed();
  return report;
}

template <class Oracle>
RunReport mpai_solve(const ProxSetup& setup, Oracle&& oracle,
                     SolverConfig config) {
  config.mode = SolverMode::kMpai;
  return solve(setup, std::forward<Oracle>(oracle), config);
}

// L-adaptive baseline: delta is interpreted as a fixed known bound and never
// halved or doubled.
template <class Oracle>
RunReport adaptive_mp_solve(const ProxSetup& setup, Oracle&& oracle,
                            SolverConfig config) {
  config.mode = SolverMode::kAdaptiveFixedDelta;
  return solve(setup, std::forward<Oracle>(oracle), config);
}

// Non-adaptive baseline: L0 is interpreted as the known Lipschitz constant.
template <class Oracle>
RunReport fixed_step_mp_solve(const ProxSetup& setup, Oracle&& oracle,
                              SolverConfig config) {
  config.mode = SolverMode::kFixedStep;
  return solve(setup, std::forward<Oracle>(oracle), config);
}

template <class Oracle>
RunReport solve_bounded_operator(const ProxSetup& setup, Oracle&& oracle,
                                 SolverConfig config) {
  config.mode = SolverMode::kBoundedOperator;
  return solve(setup, std::forward<Oracle>(oracle), config);
}

// Certified quality of the weighted average y_tilde:
//
//   max_{x in Q} <g(x), y_tilde - x>
//       <= R^2 / S_N + (1/S_N) sum_k (delta^{k+1}/L^{k+1}) ||y^{k+1}-x^{k+1}||
//
// for monotone g. Recomputed from the records; bounded-mode steps that exited
// through the smoothness test contribute no error.
inline double general_estimate(const RunReport& report) {
  if (report.records.empty())
    return std::numeric_limits<double>::infinity();
  double S = 0.0;
  double err = 0.0;
  for (const auto& rec : report.records) {
    S += 1.0 / rec.L;
    err += detail::certified_error(rec);
  }
  return (report.R_squared + err) / S;
}

// Evaluates the per-trajectory estimate underlying the certificate at an
// arbitrary feasible probe point:
//
//   sum_k (1/L^{k+1}) <g(y^{k+1}), y^{k+1} - probe>
//       <= V(probe, x^0) - V(probe, x^N)
//          + sum_k (delta^{k+1}/L^{k+1}) ||y^{k+1} - x^{k+1}||.
//
// Returns RHS - LHS, which must be >= -1e-8 * max(1, |RHS|) up to round-off;
// rhs_out receives the RHS for scale-relative checks. Re-evaluates the
// oracle at the recorded points, so the oracle must be the deterministic
// operator the run used.
template <class Oracle>
double trajectory_estimate_residual(const RunReport& report,
                                    const Vector& probe,
                                    const ProxSetup& setup, Oracle&& oracle,
                                    double* rhs_out = nullptr) {
  if (!setup.contains(probe))
    throw std::invalid_argument("trajectory_estimate_residual: probe infeasible");
  if (report.records.empty()) return 0.0;
  double lhs = 0.0;
  double err = 0.0;
  for (const auto& rec : report.records) {
    const Vector g_y = oracle(rec.y);
    lhs += g_y.dot(rec.y - probe) / rec.L;
    err += rec.step_error_term;
  }
  const double rhs = setup.bregman(probe, report.x0) -
                     setup.bregman(probe, report.records.back().x_next) + err;
  if (rhs_out) *rhs_out = rhs;
  return rhs - lhs;
}

// Total line-search cost bound: the number of prox-pair attempts in an
// adaptive run never exceeds
//
//   4 N + max{ log2(2 L_max / L0), log2(2 delta_max / delta0) },
//
// with L_max, delta_max the largest accepted values standing in for the
// unknown true constants. The delta term is skipped when delta0 or delta_max
// is zero.
inline bool attempt_bound_check(const RunReport& report,
                                const SolverConfig& config) {
  if (report.records.empty()) return report.total_attempts == 0;
  const double n = static_cast<double>(report.records.size());
  double l_max = 0.0;
  double d_max = 0.0;
  for (const auto& rec : report.records) {
    l_max = std::max(l_max, rec.L);
    d_max = std::max(d_max, rec.delta);
  }
  double log_term = std::log2(2.0 * l_max / config.L0);
  if (config.delta0 > 0.0 && d_max > 0.0)
    log_term = std::max(log_term, std::log2(2.0 * d_max / config.delta0));
  return static_cast<double>(report.total_attempts) <= 4.0 * n + log_term;
}

inline const char* mode_name(SolverMode mode) {
  switch (mode) {
    case SolverMode::kMpai: return "mpai";
    case SolverMode::kAdaptiveFixedDelta: return "adaptive";
    case SolverMode::kFixedStep: return "fixed";
    case SolverMode::kBoundedOperator: return "bounded";
  }
  return "unknown";
}

inline const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kStoppingRuleMet: return "stopping_rule";
    case StopReason::kIterationBudget: return "iteration_budget";
    case StopReason::kAttemptBudget: return "attempt_budget";
  }
  return "unknown";
}

}  // namespace mpvi
