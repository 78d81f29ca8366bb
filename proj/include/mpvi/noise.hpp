#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>

#include "mpvi/prox_setup.hpp"
#include "mpvi/rng.hpp"

namespace mpvi {

// Wraps an oracle with additive noise drawn per query from the dual-norm
// ball of radius delta / 2, so dual_norm(noisy(x) - base(x)) <= delta / 2
// always. The draw depends only on the query index, never on the query
// point: two runs with the same seed see the same noise at the same call
// position, which is what makes paired-mode comparisons and replay
// verification exact. Holds per-run generator state, so use one instance
// per solver run.
class NoisyOracle {
 public:
  NoisyOracle(std::function<Vector(const Vector&)> base, ProxSetupPtr geometry,
              double delta, std::uint64_t seed)
      : base_(std::move(base)),
        geometry_(std::move(geometry)),
        delta_(delta),
        seed_(seed),
        rng_(derive_rng(seed, 0)) {
    if (!(delta_ >= 0.0))
      throw std::invalid_argument("noise level must be nonnegative");
    if (!geometry_) throw std::invalid_argument("noise geometry missing");
  }

  Vector operator()(const Vector& x) {
    ++queries_;
    Vector g = base_(x);
    if (delta_ == 0.0) return g;
    return g + geometry_->sample_dual_ball(rng_, delta_ / 2.0);
  }

  double delta() const { return delta_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t queries() const { return queries_; }

 private:
  std::function<Vector(const Vector&)> base_;
  ProxSetupPtr geometry_;
  double delta_;
  std::uint64_t seed_;
  Rng rng_;
  std::int64_t queries_ = 0;
};

inline NoisyOracle noisy_wrap(std::function<Vector(const Vector&)> base,
                              ProxSetupPtr geometry, double delta,
                              std::uint64_t seed) {
  return NoisyOracle(std::move(base), std::move(geometry), delta, seed);
}

}  // namespace mpvi
