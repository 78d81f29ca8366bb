#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

#include "mpvi/prox_setup.hpp"
#include "mpvi/rng.hpp"

namespace mpvi {

enum class PayoffDistribution { kStandardNormal, kUniformSymmetric };

// Zero-sum bilinear game min_{x in Dn} max_{y in Dm} x^T A y. The payoff is
// n x m; the seed records how it was generated.
struct MatrixGame {
  Eigen::MatrixXd payoff;
  std::uint64_t seed = 0;
  PayoffDistribution distribution = PayoffDistribution::kStandardNormal;

  int rows() const { return static_cast<int>(payoff.rows()); }
  int cols() const { return static_cast<int>(payoff.cols()); }
};

// Entries drawn i.i.d. from a zero-centered distribution, reproducible from
// the seed.
inline MatrixGame generate_matrix_game(int n, int m,
                                       PayoffDistribution distribution,
                                       std::uint64_t seed) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("matrix game dimensions must be >= 1");
  MatrixGame game;
  game.seed = seed;
  game.distribution = distribution;
  game.payoff.resize(n, m);
  Rng rng = derive_rng(seed, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      game.payoff(i, j) = distribution == PayoffDistribution::kStandardNormal
                              ? rng.normal()
                              : rng.uniform(-1.0, 1.0);
  return game;
}

// Monotone saddle operator of the game at u = (x, y): the gradient of the
// bilinear form in x stacked over minus the gradient in y.
inline Vector matrix_game_operator(const MatrixGame& game, const Vector& u) {
  const int n = game.rows();
  const int m = game.cols();
  if (static_cast<int>(u.size()) != n + m)
    throw std::invalid_argument("matrix game operator: dimension mismatch");
  Vector g(n + m);
  g.head(n) = game.payoff * u.tail(m);
  g.tail(m) = -game.payoff.transpose() * u.head(n);
  return g;
}

// Exact duality gap max_j (A^T x)_j - min_i (A y)_i, the maximum of the VI
// merit <g(w), u - w> over the (vertex-attained) feasible set. Zero exactly
// at an equilibrium.
inline double matrix_game_exact_gap(const MatrixGame& game, const Vector& x,
                                    const Vector& y) {
  if (static_cast<int>(x.size()) != game.rows() ||
      static_cast<int>(y.size()) != game.cols())
    throw std::invalid_argument("matrix game gap: dimension mismatch");
  return (game.payoff.transpose() * x).maxCoeff() -
         (game.payoff * y).minCoeff();
}

inline double matrix_game_exact_gap(const MatrixGame& game, const Vector& u) {
  return matrix_game_exact_gap(game, u.head(game.rows()),
                               u.tail(game.cols()));
}

// Entropy prox on the product of the two strategy simplexes.
inline ProxSetupPtr matrix_game_setup(const MatrixGame& game) {
  return make_product(
      {make_entropy_simplex(game.rows()), make_entropy_simplex(game.cols())});
}

// Operator constant max |A_ij| for the l1-type primal / l-infinity-type dual
// pairing of the entropy setup; the step 1/L of the non-adaptive baseline.
inline double matrix_game_lipschitz(const MatrixGame& game) {
  return game.payoff.cwiseAbs().maxCoeff();
}

struct MatrixGameOracle {
  const MatrixGame* game;
  Vector operator()(const Vector& u) const {
    return matrix_game_operator(*game, u);
  }
};

inline MatrixGameOracle matrix_game_oracle(const MatrixGame& game) {
  return MatrixGameOracle{&game};
}

}  // namespace mpvi
