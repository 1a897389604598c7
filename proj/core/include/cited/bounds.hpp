#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cited/graph.hpp"
#include "cited/model.hpp"

namespace cited {

/// Inputs of the layer-wise perturbation bound
///   Delta = e R L eta ||W_1|| ||W_L|| C_phi ((dC)^{L-1} - 1) / (dC - 1),
///   C = C_phi C_rho C_g ||W_2||,
/// with the (L - 1) limit when dC = 1.
struct BoundInputs {
  std::size_t layers = 2;
  std::vector<double> spectral_norms;  // ||W_1||, ..., ||W_L||
  double c_phi = 1.0;
  double c_rho = 1.0;
  double c_g = 1.0;
  double degree = 1.0;
  double radius = 0.0;
  double eta = 0.0;
};

/// Throws HypothesisViolated when eta > 1/L, InvalidArgument for L < 2 or a
/// norm list of the wrong length.
double delta_g(const BoundInputs& b);

/// sigma^2 = (d eta)^2 (prod_{i<L} ||W_i||)^2 sum_i (rho_i / ||W_i||)^2.
/// Throws DegenerateWeight on a zero norm.
double proxy_variance(std::span<const double> spectral_norms, std::span<const double> rho,
                      double eta, double degree, std::size_t layers);

/// 1 - (C - 1) exp(-gamma^2 / (8 sigma^2)), clamped to [0, 1].
double agreement_lower_bound(double gamma, double sigma2, std::size_t classes);

/// 1 - exp(-(Delta - lambda)^2 / (2 sigma^2)).
double wasserstein_tail_bound(double delta, double lambda, double sigma2);

struct TailRow {
  double lambda = 0.0;
  double empirical = 0.0;    // fraction of trials with D < lambda
  double theoretical = 0.0;  // lower bound on Pr(D < lambda)
};

struct BoundReport {
  double delta_g = 0.0;           // bound used for violation counting
  double delta_g_generic = 0.0;   // d = max degree, C_g = ||A||
  double delta_g_measured = 0.0;  // d * C_g replaced by ||A||
  double sigma2 = 0.0;
  double sigma2_measured = 0.0;
  double radius = 0.0;
  double adjacency_norm = 0.0;
  std::size_t max_degree = 0;
  std::size_t layers = 0;
  double eta = 0.0;
  std::vector<double> spectral_norms;
  std::size_t trials = 0;
  std::vector<double> deviations;  // per trial
  double max_observed_deviation = 0.0;
  std::size_t violations = 0;
  std::vector<TailRow> tail;
  // Agreement check only.
  std::vector<double> trial_agreement;  // per trial
  double empirical_agreement = 1.0;
  double theoretical_agreement_lb = 0.0;
  double gamma_min = 0.0;
};

/// Perturbs the weights `trials` times (seed + trial index) and measures
/// the largest per-node embedding deviation against the two-layer bound.
/// eta = 0 runs unperturbed trials. Throws HypothesisViolated for eta > 1/2.
BoundReport empirical_perturbation_check(const ModelParams& p, const Graph& g,
                                         const SparseMatrix& adj, const Matrix& X, double eta,
                                         std::size_t trials, std::uint64_t seed,
                                         std::size_t grid_points = 9);

/// Argmax stability of the logits on `nodes` under the same perturbations,
/// compared with the agreement lower bound (three weight layers). Throws
/// HypothesisViolated for eta > 1/3.
BoundReport agreement_check(const ModelParams& p, const Graph& g, const SparseMatrix& adj,
                            const Matrix& X, std::span<const NodeId> nodes, double eta,
                            std::size_t trials, std::uint64_t seed);

}  // namespace cited
