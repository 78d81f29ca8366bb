#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mpvi/prox_setup.hpp"
#include "mpvi/rng.hpp"

namespace mpvi {

// Fermat-Torricelli-Steiner objective family: minimize the summed distances
// from a point to N centers (to the balls around them in the kBallDistances
// variant) subject to m quadratic constraints
//
//   phi_p(x) = sum_j alpha_{pj} x_j^2 - 1 <= 0,
//
// treated through the Lagrangian saddle problem on the joint unit ball of
// (x, lambda) in R^{n+m}.
enum class FtsVariant { kBallDistances, kPointDistances };

struct FtsProblem {
  FtsVariant variant = FtsVariant::kPointDistances;
  Eigen::MatrixXd centers;      // N x n, one center per row
  Eigen::VectorXd radii;        // N, used by kBallDistances
  Eigen::MatrixXd constraints;  // m x n, the alpha coefficients
  std::uint64_t seed = 0;
  bool unit_ball_centers = false;

  int space_dim() const { return static_cast<int>(centers.cols()); }
  int num_constraints() const {
    return static_cast<int>(constraints.rows());
  }
  int num_centers() const { return static_cast<int>(centers.rows()); }
  int joint_dim() const { return space_dim() + num_constraints(); }
};

// Generates an instance: ball variant draws centers with ||A_k|| uniform in
// [1, 2] and unit radii; point variant draws integer coordinates in [-10, 10];
// with unit_ball_centers the points are drawn uniformly inside the unit ball.
// Each constraint row is all ones except one random position holding an
// integer strictly between 1 and 10.
inline FtsProblem generate_fts(FtsVariant variant, int n, int m, int centers,
                               std::uint64_t seed,
                               bool unit_ball_centers = false) {
  if (n < 1 || m < 1 || centers < 1)
    throw std::invalid_argument("fts dimensions must be >= 1");
  FtsProblem prob;
  prob.variant = variant;
  prob.seed = seed;
  prob.unit_ball_centers = unit_ball_centers;
  prob.centers.resize(centers, n);
  prob.radii = Eigen::VectorXd::Zero(centers);
  Rng rng = derive_rng(seed, 0);

  for (int k = 0; k < centers; ++k) {
    if (variant == FtsVariant::kBallDistances) {
      Eigen::VectorXd dir(n);
      for (int j = 0; j < n; ++j) dir[j] = rng.normal();
      dir /= dir.norm();
      prob.centers.row(k) = dir.transpose() * rng.uniform(1.0, 2.0);
      prob.radii[k] = 1.0;
    } else if (unit_ball_centers) {
      Eigen::VectorXd dir(n);
      for (int j = 0; j < n; ++j) dir[j] = rng.normal();
      const double r =
          std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
      prob.centers.row(k) = dir.transpose() * (r / dir.norm());
    } else {
      for (int j = 0; j < n; ++j)
        prob.centers(k, j) =
            static_cast<double>(rng.uniform_int(-10, 10));
    }
  }

  prob.constraints = Eigen::MatrixXd::Ones(m, n);
  for (int p = 0; p < m; ++p) {
    const int pos = static_cast<int>(rng.uniform_int(0, n - 1));
    prob.constraints(p, pos) = static_cast<double>(rng.uniform_int(2, 9));
  }
  return prob;
}

// Sum over centers of the distance terms: max(||x - A_k|| - r_k, 0) for the
// ball variant, ||x - A_k|| for points.
inline double fts_objective(const FtsProblem& prob, const Vector& x) {
  if (static_cast<int>(x.size()) != prob.space_dim())
    throw std::invalid_argument("fts objective: dimension mismatch");
  double acc = 0.0;
  for (int k = 0; k < prob.num_centers(); ++k) {
    const double dist = (x - prob.centers.row(k).transpose()).norm();
    acc += prob.variant == FtsVariant::kBallDistances
               ? std::max(dist - prob.radii[k], 0.0)
               : dist;
  }
  return acc;
}

// Deterministic subgradient: each active term contributes the unit vector
// (x - A_k) / ||x - A_k||; at kinks (x on a ball boundary or exactly at a
// center) the zero element of the subdifferential is selected.
inline Vector fts_subgradient(const FtsProblem& prob, const Vector& x) {
  if (static_cast<int>(x.size()) != prob.space_dim())
    throw std::invalid_argument("fts subgradient: dimension mismatch");
  Vector g = Vector::Zero(prob.space_dim());
  for (int k = 0; k < prob.num_centers(); ++k) {
    const Vector diff = x - prob.centers.row(k).transpose();
    const double dist = diff.norm();
    const double threshold =
        prob.variant == FtsVariant::kBallDistances ? prob.radii[k] : 0.0;
    if (dist > threshold) g += diff / dist;
  }
  return g;
}

// Saddle operator of the Lagrangian at u = (x, lambda):
// top block  grad f(x) + sum_p lambda_p * grad phi_p(x),
// bottom     (-phi_1(x), ..., -phi_m(x)).
inline Vector fts_vi_operator(const FtsProblem& prob, const Vector& u) {
  const int n = prob.space_dim();
  const int m = prob.num_constraints();
  if (static_cast<int>(u.size()) != n + m)
    throw std::invalid_argument("fts operator: dimension mismatch");
  const Vector x = u.head(n);
  const Vector lambda = u.tail(m);
  Vector g(n + m);
  // grad phi_p(x) = 2 * (alpha_p .* x), so the weighted sum collapses to
  // 2 * x .* (alpha^T lambda).
  g.head(n) = fts_subgradient(prob, x) +
              2.0 * x.cwiseProduct(prob.constraints.transpose() * lambda);
  g.tail(m) =
      Eigen::VectorXd::Ones(m) - prob.constraints * x.cwiseAbs2();
  return g;
}

// Joint feasible set: the unit ball of R^{n+m} around the origin.
inline ProxSetupPtr fts_setup(const FtsProblem& prob) {
  return make_euclidean_ball(prob.joint_dim(), 1.0);
}

// Uniform start on the unit sphere, ((m+n)^{-1/2}, ..., (m+n)^{-1/2}).
inline Vector fts_sphere_start(const FtsProblem& prob) {
  const int d = prob.joint_dim();
  return Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

struct FtsOracle {
  const FtsProblem* problem;
  Vector operator()(const Vector& u) const {
    return fts_vi_operator(*problem, u);
  }
};

inline FtsOracle fts_oracle(const FtsProblem& prob) {
  return FtsOracle{&prob};
}

}  // namespace mpvi
