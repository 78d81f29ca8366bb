#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mpvi/rng.hpp"

namespace mpvi {

using Vector = Eigen::VectorXd;

// Slack used by all set-membership checks.
inline constexpr double kFeasibilityTol = 1e-12;

// Entries are clamped to this floor before any logarithm, so points that have
// drifted onto the simplex boundary keep finite divergences and gradients.
inline constexpr double kEntropyClamp = 1e-16;

// A feasible set bundled with the distance generating function that shapes
// the prox steps. The d.g.f. d is 1-strongly convex with respect to the
// primal norm, V(x, y) = d(x) - d(y) - <grad d(y), x - y> is the induced
// Bregman divergence, and prox solves
//
//     argmin_{u in Q} { <s, u> + L * V(u, anchor) }
//
// in closed form. Instances are immutable after construction and safe to
// share across concurrent solver runs; all operations are pure.
class ProxSetup {
 public:
  virtual ~ProxSetup() = default;

  virtual int dim() const = 0;

  virtual double dgf(const Vector& x) const = 0;
  virtual Vector dgf_gradient(const Vector& x) const = 0;

  // V(x, y). Satisfies V(x, y) >= 0.5 * primal_norm(x - y)^2 and V(x, x) = 0.
  // The entropy divergence is +infinity when y has an exactly zero entry
  // where x is positive. Both points must be feasible.
  double bregman(const Vector& x, const Vector& y) const {
    require_feasible(x, "bregman: first argument infeasible");
    require_feasible(y, "bregman: second argument infeasible");
    // Guard against round-off driving tiny divergences slightly negative.
    return std::max(bregman_impl(x, y), 0.0);
  }

  // Prox-mapping: argmin_{u in Q} { <dual_step, u> + L * V(u, anchor) }.
  Vector prox(const Vector& anchor, const Vector& dual_step, double L) const {
    if (!(L > 0.0)) throw std::invalid_argument("prox: L must be positive");
    require_feasible(anchor, "prox: anchor infeasible");
    require_dim(dual_step, "prox: dual vector dimension mismatch");
    return prox_impl(anchor, dual_step, L);
  }

  // Minimizer of the d.g.f. over the set.
  virtual Vector initial_point() const = 0;

  // R^2 = max_{x in Q} V(x, start). The default start is the d.g.f.
  // minimizer. For the entropy setup this is the supremum over the closed
  // simplex (attained in the limit at a vertex).
  double omega_radius_squared() const {
    return omega_radius_squared(initial_point());
  }
  double omega_radius_squared(const Vector& start) const {
    require_feasible(start, "omega_radius_squared: start infeasible");
    return omega_radius_squared_impl(start);
  }

  double primal_norm(const Vector& v) const {
    require_dim(v, "primal_norm: dimension mismatch");
    return primal_norm_impl(v);
  }
  double dual_norm(const Vector& s) const {
    require_dim(s, "dual_norm: dimension mismatch");
    return dual_norm_impl(s);
  }

  virtual bool contains(const Vector& x, double tol = kFeasibilityTol) const = 0;

  // Random feasible point; used by property checks and certificate probes.
  virtual Vector sample(Rng& rng) const = 0;

  // Random dual vector with dual_norm <= radius; used by the noise wrapper.
  virtual Vector sample_dual_ball(Rng& rng, double radius) const = 0;

 protected:
  virtual double bregman_impl(const Vector& x, const Vector& y) const = 0;
  virtual Vector prox_impl(const Vector& anchor, const Vector& dual_step,
                           double L) const = 0;
  virtual double omega_radius_squared_impl(const Vector& start) const = 0;
  virtual double primal_norm_impl(const Vector& v) const = 0;
  virtual double dual_norm_impl(const Vector& s) const = 0;

  void require_dim(const Vector& v, const char* what) const {
    if (static_cast<int>(v.size()) != dim()) throw std::invalid_argument(what);
  }
  void require_feasible(const Vector& x, const char* what) const {
    if (!contains(x)) throw std::invalid_argument(what);
  }
};

using ProxSetupPtr = std::shared_ptr<const ProxSetup>;

// Euclidean ball { x : ||x - center||_2 <= radius } with d(x) =
// 0.5 * ||x - center||^2, so V(x, y) = 0.5 * ||x - y||^2 and the prox step is
// a Euclidean projection of anchor - s / L.
class EuclideanBallSetup final : public ProxSetup {
 public:
  EuclideanBallSetup(Vector center, double radius)
      : center_(std::move(center)), radius_(radius) {
    if (!(radius_ > 0.0))
      throw std::invalid_argument("ball radius must be positive");
  }

  int dim() const override { return static_cast<int>(center_.size()); }

  double dgf(const Vector& x) const override {
    return 0.5 * (x - center_).squaredNorm();
  }
  Vector dgf_gradient(const Vector& x) const override { return x - center_; }

  Vector initial_point() const override { return center_; }

  bool contains(const Vector& x, double tol) const override {
    return x.size() == center_.size() &&
           (x - center_).norm() <= radius_ + tol;
  }

  Vector sample(Rng& rng) const override {
    const int n = dim();
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir[i] = rng.normal();
    const double norm = dir.norm();
    if (norm == 0.0) return center_;
    const double r =
        radius_ * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
    return center_ + dir * (r / norm);
  }

  Vector sample_dual_ball(Rng& rng, double radius) const override {
    const int n = dim();
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir[i] = rng.normal();
    const double norm = dir.norm();
    if (norm == 0.0) return Vector::Zero(n);
    const double r =
        radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
    return dir * (r / norm);
  }

  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

 protected:
  double bregman_impl(const Vector& x, const Vector& y) const override {
    return 0.5 * (x - y).squaredNorm();
  }

  Vector prox_impl(const Vector& anchor, const Vector& s,
                   double L) const override {
    return project(anchor - s / L);
  }

  double omega_radius_squared_impl(const Vector& start) const override {
    // The farthest ball point from `start` lies diametrically opposite.
    const double reach = radius_ + (start - center_).norm();
    return 0.5 * reach * reach;
  }

  double primal_norm_impl(const Vector& v) const override { return v.norm(); }
  double dual_norm_impl(const Vector& s) const override { return s.norm(); }

 private:
  Vector project(const Vector& v) const {
    const Vector d = v - center_;
    const double n = d.norm();
    if (n <= radius_) return v;
    return center_ + d * (radius_ / n);
  }

  Vector center_;
  double radius_;
};

// Standard simplex with the entropy d.g.f. d(x) = sum_i x_i ln x_i, which is
// 1-strongly convex with respect to the l1 norm. V is the (generalized)
// Kullback-Leibler divergence and the prox step is a normalized
// multiplicative update, evaluated in the log domain with max-subtraction so
// extreme dual vectors never overflow.
class EntropySimplexSetup final : public ProxSetup {
 public:
  explicit EntropySimplexSetup(int n) : n_(n) {
    if (n_ < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  }

  int dim() const override { return n_; }

  double dgf(const Vector& x) const override {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i)
      if (x[i] > 0.0) acc += x[i] * std::log(x[i]);
    return acc;
  }

  Vector dgf_gradient(const Vector& x) const override {
    Vector g(n_);
    for (int i = 0; i < n_; ++i)
      g[i] = 1.0 + std::log(std::max(x[i], kEntropyClamp));
    return g;
  }

  Vector initial_point() const override {
    return Vector::Constant(n_, 1.0 / static_cast<double>(n_));
  }

  bool contains(const Vector& x, double tol) const override {
    if (static_cast<int>(x.size()) != n_) return false;
    return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
  }

  Vector sample(Rng& rng) const override {
    // Exponential spacings give a uniform (Dirichlet(1)) sample.
    Vector e(n_);
    for (int i = 0; i < n_; ++i)
      e[i] = -std::log(1.0 - rng.uniform01() + 1e-300);
    return e / e.sum();
  }

  Vector sample_dual_ball(Rng& rng, double radius) const override {
    // The dual ball is the l-infinity box.
    Vector s(n_);
    for (int i = 0; i < n_; ++i) s[i] = rng.uniform(-radius, radius);
    return s;
  }

 protected:
  double bregman_impl(const Vector& x, const Vector& y) const override {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (y[i] <= 0.0 && x[i] > 1e-15)
        return std::numeric_limits<double>::infinity();
      if (x[i] > 0.0)
        acc += x[i] * (std::log(std::max(x[i], kEntropyClamp)) -
                       std::log(std::max(y[i], kEntropyClamp)));
    }
    // Generalized-KL correction; vanishes when both points sum to one.
    acc += y.sum() - x.sum();
    return acc;
  }

  Vector prox_impl(const Vector& anchor, const Vector& s,
                   double L) const override {
    Vector w(n_);
    for (int i = 0; i < n_; ++i)
      w[i] = std::log(std::max(anchor[i], kEntropyClamp)) - s[i] / L;
    const double m = w.maxCoeff();
    Vector u(n_);
    for (int i = 0; i < n_; ++i)
      u[i] = std::max(std::exp(w[i] - m), 1e-300);
    u /= u.sum();
    return u;
  }

  double omega_radius_squared_impl(const Vector& start) const override {
    // sup_x KL(x || start) over the simplex is reached toward a vertex.
    double worst = 0.0;
    for (int i = 0; i < n_; ++i)
      worst = std::max(worst, -std::log(std::max(start[i], kEntropyClamp)));
    return worst;
  }

  double primal_norm_impl(const Vector& v) const override {
    return v.lpNorm<1>();
  }
  double dual_norm_impl(const Vector& s) const override {
    return s.lpNorm<Eigen::Infinity>();
  }

 private:
  int n_;
};

// Cartesian product of prox setups. The d.g.f. is the unweighted sum of the
// factor d.g.f.s; the primal norm is the l2 composition of the factor norms,
// sqrt(sum_j ||v_j||_j^2), which keeps the summed d.g.f. 1-strongly convex
// and makes R^2 additive across factors. Everything else acts blockwise.
class ProductSetup final : public ProxSetup {
 public:
  explicit ProductSetup(std::vector<ProxSetupPtr> factors)
      : factors_(std::move(factors)) {
    if (factors_.empty())
      throw std::invalid_argument("product setup needs at least one factor");
    offsets_.reserve(factors_.size() + 1);
    offsets_.push_back(0);
    for (const auto& f : factors_) {
      if (!f) throw std::invalid_argument("product setup: null factor");
      offsets_.push_back(offsets_.back() + f->dim());
    }
  }

  int dim() const override { return offsets_.back(); }
  std::size_t num_factors() const { return factors_.size(); }
  const ProxSetup& factor(std::size_t i) const { return *factors_[i]; }

  double dgf(const Vector& x) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < factors_.size(); ++j)
      acc += factors_[j]->dgf(block(x, j));
    return acc;
  }

  Vector dgf_gradient(const Vector& x) const override {
    Vector g(dim());
    for (std::size_t j = 0; j < factors_.size(); ++j)
      set_block(g, j, factors_[j]->dgf_gradient(block(x, j)));
    return g;
  }

  Vector initial_point() const override {
    Vector x(dim());
    for (std::size_t j = 0; j < factors_.size(); ++j)
      set_block(x, j, factors_[j]->initial_point());
    return x;
  }

  bool contains(const Vector& x, double tol) const override {
    if (static_cast<int>(x.size()) != dim()) return false;
    for (std::size_t j = 0; j < factors_.size(); ++j)
      if (!factors_[j]->contains(block(x, j), tol)) return false;
    return true;
  }

  Vector sample(Rng& rng) const override {
    Vector x(dim());
    for (std::size_t j = 0; j < factors_.size(); ++j)
      set_block(x, j, factors_[j]->sample(rng));
    return x;
  }

  Vector sample_dual_ball(Rng& rng, double radius) const override {
    // Splitting the radius across blocks keeps the composite dual norm,
    // sqrt(sum_j ||s_j||^2), within the requested bound.
    const double per_block =
        radius / std::sqrt(static_cast<double>(factors_.size()));
    Vector s(dim());
    for (std::size_t j = 0; j < factors_.size(); ++j)
      set_block(s, j, factors_[j]->sample_dual_ball(rng, per_block));
    return s;
  }

 protected:
  double bregman_impl(const Vector& x, const Vector& y) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < factors_.size(); ++j)
      acc += factors_[j]->bregman(block(x, j), block(y, j));
    return acc;
  }

  Vector prox_impl(const Vector& anchor, const Vector& s,
                   double L) const override {
    Vector u(dim());
    for (std::size_t j = 0; j < factors_.size(); ++j)
      set_block(u, j, factors_[j]->prox(block(anchor, j), block(s, j), L));
    return u;
  }

  double omega_radius_squared_impl(const Vector& start) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < factors_.size(); ++j)
      acc += factors_[j]->omega_radius_squared(block(start, j));
    return acc;
  }

  double primal_norm_impl(const Vector& v) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < factors_.size(); ++j) {
      const double b = factors_[j]->primal_norm(block(v, j));
      acc += b * b;
    }
    return std::sqrt(acc);
  }

  double dual_norm_impl(const Vector& s) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < factors_.size(); ++j) {
      const double b = factors_[j]->dual_norm(block(s, j));
      acc += b * b;
    }
    return std::sqrt(acc);
  }

 private:
  Vector block(const Vector& x, std::size_t j) const {
    return x.segment(offsets_[j], factors_[j]->dim());
  }
  void set_block(Vector& x, std::size_t j, const Vector& v) const {
    x.segment(offsets_[j], factors_[j]->dim()) = v;
  }

  std::vector<ProxSetupPtr> factors_;
  std::vector<int> offsets_;
};

inline ProxSetupPtr make_euclidean_ball(Vector center, double radius) {
  return std::make_shared<EuclideanBallSetup>(std::move(center), radius);
}

inline ProxSetupPtr make_euclidean_ball(int dim, double radius) {
  return std::make_shared<EuclideanBallSetup>(Vector::Zero(dim), radius);
}

inline ProxSetupPtr make_entropy_simplex(int n) {
  return std::make_shared<EntropySimplexSetup>(n);
}

inline ProxSetupPtr make_product(std::vector<ProxSetupPtr> factors) {
  return std::make_shared<ProductSetup>(std::move(factors));
}

}  // namespace mpvi
