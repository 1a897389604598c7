#include "cited/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cited/error.hpp"
#include "cited/spectral.hpp"

namespace cited {

ModelParams prune_weights(const ModelParams& p, double fraction) {
  require(fraction >= 0.0 && fraction <= 1.0, ErrorCode::InvalidArgument,
          "prune fraction must be in [0,1]");
  ModelParams out = p;
  std::array<Matrix*, 3> weights{&out.W1, &out.W2, &out.Wc};

  struct Slot {
    double magnitude;
    std::size_t tensor;
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    auto vals = weights[t]->values();
    for (std::size_t k = 0; k < vals.size(); ++k) slots.push_back({std::abs(vals[k]), t, k});
  }
  const auto count =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(slots.size())));
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& a, const Slot& b) { return a.magnitude < b.magnitude; });
  for (std::size_t i = 0; i < count; ++i) weights[slots[i].tensor]->values()[slots[i].index] = 0.0;
  return out;
}

PerturbedModel perturb_params(const ModelParams& p, double eta, std::uint64_t seed) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "eta must be > 0");
  PerturbedModel out;
  out.params = p;
  std::array<Matrix*, 3> weights{&out.params.W1, &out.params.W2, &out.params.Wc};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Matrix& W = *weights[i];
    const double wn = spectral_norm(W, kPreciseNormIters, kPreciseNormTol);
    require(wn > 0.0, ErrorCode::DegenerateWeight,
            "weight matrix " + std::to_string(i) + " has zero spectral norm");
    Matrix U(W.rows(), W.cols());
    for (double& x : U.values()) x = gauss(rng);
    const double un = spectral_norm(U, kPreciseNormIters, kPreciseNormTol);
    const double scale = eta * wn / un;
    auto w = W.values();
    auto u = U.values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += scale * u[k];
    out.weight_norms[i] = wn;
    out.rho[i] = eta * wn;
  }
  return out;
}

}  // namespace cited
