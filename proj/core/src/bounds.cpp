#include "cited/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <functional>
#include <limits>
#include <numbers>

#include "cited/error.hpp"
#include "cited/spectral.hpp"
#include "cited/surgery.hpp"

namespace cited {

double delta_g(const BoundInputs& b) {
  require(b.layers >= 2, ErrorCode::InvalidArgument, "the bound needs at least two layers");
  require(b.spectral_norms.size() == b.layers, ErrorCode::InvalidArgument,
          "need one spectral norm per layer");
  require(b.eta >= 0.0, ErrorCode::InvalidArgument, "eta must be >= 0");
  const double L = static_cast<double>(b.layers);
  require(b.eta <= 1.0 / L, ErrorCode::HypothesisViolated,
          "eta = " + std::to_string(b.eta) + " exceeds 1/L = " + std::to_string(1.0 / L));
  const double C = b.c_phi * b.c_rho * b.c_g * b.spectral_norms[1];
  const double dC = b.degree * C;
  const double geometric = std::abs(dC - 1.0) < 1e-12
                               ? L - 1.0
                               : (std::pow(dC, L - 1.0) - 1.0) / (dC - 1.0);
  return std::numbers::e * b.radius * L * b.eta * b.spectral_norms.front() *
         b.spectral_norms.back() * b.c_phi * geometric;
}

double proxy_variance(std::span<const double> spectral_norms, std::span<const double> rho,
                      double eta, double degree, std::size_t layers) {
  require(spectral_norms.size() >= layers && rho.size() >= layers, ErrorCode::InvalidArgument,
          "need a norm and a rho per layer");
  double prod = 1.0;
  for (std::size_t i = 0; i + 1 < layers; ++i) prod *= spectral_norms[i];
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < layers; ++i) {
    require(spectral_norms[i] > 0.0, ErrorCode::DegenerateWeight,
            "zero spectral norm in proxy variance");
    const double r = rho[i] / spectral_norms[i];
    ratio_sum += r * r;
  }
  const double de = degree * eta;
  return de * de * prod * prod * ratio_sum;
}

double agreement_lower_bound(double gamma, double sigma2, std::size_t classes) {
  if (sigma2 <= 0.0) return gamma > 0.0 ? 1.0 : 0.0;
  const double lb = 1.0 - static_cast<double>(classes - 1) * std::exp(-gamma * gamma / (8.0 * sigma2));
  return std::clamp(lb, 0.0, 1.0);
}

double wasserstein_tail_bound(double delta, double lambda, double sigma2) {
  if (sigma2 <= 0.0) return lambda < delta ? 1.0 : 0.0;
  const double gap = delta - lambda;
  return 1.0 - std::exp(-gap * gap / (2.0 * sigma2));
}

namespace {

double max_row_norm(const Matrix& X) {
  double best = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) best = std::max(best, euclidean_norm(X.row(i)));
  return best;
}

double max_row_deviation(const Matrix& a, const Matrix& b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    best = std::max(best, std::sqrt(squared_distance(a.row(i), b.row(i))));
  return best;
}

// Fills the layer-dependent constants shared by both checks.
BoundReport prepare(const ModelParams& p, const Graph& g, const SparseMatrix& adj,
                    const Matrix& X, double eta, std::size_t layers) {
  BoundReport r;
  r.layers = layers;
  r.eta = eta;
  r.radius = max_row_norm(X);
  r.max_degree = g.max_degree();
  r.adjacency_norm = spectral_norm(adj, kPreciseNormIters, kPreciseNormTol);
  const std::array<const Matrix*, 3> ws{&p.W1, &p.W2, &p.Wc};
  for (std::size_t i = 0; i < layers; ++i)
    r.spectral_norms.push_back(spectral_norm(*ws[i], kPreciseNormIters, kPreciseNormTol));

  BoundInputs generic;
  generic.layers = layers;
  generic.spectral_norms = r.spectral_norms;
  generic.c_g = r.adjacency_norm;
  generic.degree = static_cast<double>(std::max<std::size_t>(r.max_degree, 1));
  generic.radius = r.radius;
  generic.eta = eta;
  r.delta_g_generic = delta_g(generic);

  BoundInputs measured = generic;
  measured.degree = 1.0;
  r.delta_g_measured = delta_g(measured);
  r.delta_g = std::min(r.delta_g_generic, r.delta_g_measured);

  std::vector<double> rho;
  for (double w : r.spectral_norms) rho.push_back(eta * w);
  r.sigma2 = proxy_variance(r.spectral_norms, rho, eta, generic.degree, layers);
  r.sigma2_measured = proxy_variance(r.spectral_norms, rho, eta, r.adjacency_norm, layers);
  return r;
}

}  // namespace

BoundReport empirical_perturbation_check(const ModelParams& p, const Graph& g,
                                         const SparseMatrix& adj, const Matrix& X, double eta,
                                         std::size_t trials, std::uint64_t seed,
                                         std::size_t grid_points) {
  BoundReport r = prepare(p, g, adj, X, eta, 2);
  r.trials = trials;
  const Matrix base = forward(p, adj, X).H;
  for (std::size_t t = 0; t < trials; ++t) {
    double dev = 0.0;
    if (eta > 0.0) {
      const PerturbedModel pm = perturb_params(p, eta, seed + t);
      dev = max_row_deviation(base, forward(pm.params, adj, X).H);
    }
    r.deviations.push_back(dev);
    r.max_observed_deviation = std::max(r.max_observed_deviation, dev);
    if (dev > r.delta_g) ++r.violations;
  }
  for (std::size_t k = 1; k <= grid_points && r.delta_g > 0.0; ++k) {
    TailRow row;
    row.lambda = r.delta_g * static_cast<double>(k) / static_cast<double>(grid_points + 1);
    std::size_t below = 0;
    for (double d : r.deviations) below += d < row.lambda ? 1 : 0;
    row.empirical = trials == 0 ? 1.0 : static_cast<double>(below) / static_cast<double>(trials);
    row.theoretical = wasserstein_tail_bound(r.delta_g, row.lambda, r.sigma2);
    r.tail.push_back(row);
  }
  return r;
}

BoundReport agreement_check(const ModelParams& p, const Graph& g, const SparseMatrix& adj,
                            const Matrix& X, std::span<const NodeId> nodes, double eta,
                            std::size_t trials, std::uint64_t seed) {
  require(!nodes.empty(), ErrorCode::InvalidArgument, "agreement check needs nodes");
  BoundReport r = prepare(p, g, adj, X, eta, 3);
  r.trials = trials;
  const Matrix base = forward(p, adj, X).Z;
  const auto base_pred = argmax_rows(base);
  const std::size_t classes = base.cols();

  double lb_sum = 0.0;
  r.gamma_min = std::numeric_limits<double>::infinity();
  for (NodeId v : nodes) {
    auto z = base.row(v);
    std::vector<double> sorted(z.begin(), z.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double gamma = classes >= 2 ? sorted[0] - sorted[1] : 0.0;
    r.gamma_min = std::min(r.gamma_min, gamma);
    lb_sum += agreement_lower_bound(gamma, r.sigma2, classes);
  }
  r.theoretical_agreement_lb = lb_sum / static_cast<double>(nodes.size());

  std::size_t agree_total = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t agree = nodes.size();
    double dev = 0.0;
    if (eta > 0.0) {
      const PerturbedModel pm = perturb_params(p, eta, seed + t);
      const Matrix z = forward(pm.params, adj, X).Z;
      const auto pred = argmax_rows(z);
      agree = 0;
      for (NodeId v : nodes) agree += pred[v] == base_pred[v] ? 1 : 0;
      dev = max_row_deviation(base, z);
    }
    agree_total += agree;
    r.trial_agreement.push_back(static_cast<double>(agree) / static_cast<double>(nodes.size()));
    r.deviations.push_back(dev);
    r.max_observed_deviation = std::max(r.max_observed_deviation, dev);
    if (dev > r.delta_g) ++r.violations;
  }
  r.empirical_agreement =
      trials == 0 ? 1.0
                  : static_cast<double>(agree_total) /
                        (static_cast<double>(trials) * static_cast<double>(nodes.size()));
  return r;
}

}  // namespace cited
