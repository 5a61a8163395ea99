#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "localfid/dataset.hpp"
#include "localfid/linalg.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/parallel.hpp"

namespace localfid {

enum class RhoMethod { exact_discrete, quadrature, monte_carlo };

std::string to_string(RhoMethod method);

// The overlap factor of a sample's neighborhoods: 1 when all m anchors share
// one neighborhood, sqrt(m) when the neighborhoods are pairwise disjoint.
struct RhoEstimate {
  double value = 1;
  RhoMethod method = RhoMethod::monte_carlo;
  std::size_t nSamples = 0;      // MC only
  double hoeffdingEpsilon = 0;   // MC only, at confidence delta
  double delta = 0;
  std::size_t m = 0;
  double stdError = 0;           // MC sample std error
  double minRatio = 0, maxRatio = 0;  // MC per-draw ratio range
};

double hoeffding_epsilon(std::size_t m, std::size_t nSamples, double delta);
double hoeffding_tail(std::size_t m, std::size_t nSamples, double t);

// Per-draw integrand of the mixture-proposal estimator:
// sqrt(m) * |p|_2 / |p|_1 computed from log densities; always in [1, sqrt m].
double rho_ratio_from_log_densities(std::span<const double> logDensities);

// Exact finite sum over the union of atoms (discrete-uniform families only).
RhoEstimate rho_exact_discrete(const Dataset& anchors,
                               const NeighborhoodFamily& family);

// Deterministic trapezoid integration, d <= 2.
RhoEstimate rho_quadrature(const Dataset& anchors,
                           const NeighborhoodFamily& family,
                           double gridHalfWidthSigmas = 8.0,
                           std::size_t pointsPerAxis = 0);  // 0 = default

// Mixture-proposal Monte Carlo: anchor picked uniformly, one sample from its
// neighborhood per draw. Deterministic per-draw streams derived from `seed`.
RhoEstimate rho_monte_carlo(const Dataset& anchors,
                            const NeighborhoodFamily& family,
                            std::size_t nSamples, double delta,
                            std::uint64_t seed, Exec exec = default_exec());

struct RhoGrowthRow {
  std::size_t m = 0;
  double rho = 0;
  double stdError = 0;  // spread across repeats
};

struct RhoGrowthResult {
  std::vector<RhoGrowthRow> rows;
  double exponent = 0;  // least-squares slope of ln rho against ln m
  double intercept = 0;
  double r2 = 0;
  double sigma = 0;
  std::uint64_t seed = 0;
};

// ln-ln least-squares line through (m_i, rho_i); the returned fit's slope is
// the growth exponent.
LineFit fit_log_log_slope(std::span<const double> ms,
                          std::span<const double> rhos);

// For each m: average the estimator over `repeats` uniform anchor subsamples
// (without replacement). Gaussian families use MC with n = samplesPerAnchor*m;
// discrete families are evaluated exactly.
RhoGrowthResult rho_growth_exponent(const Dataset& data,
                                    const NeighborhoodFamily& family,
                                    const std::vector<std::size_t>& mGrid,
                                    std::size_t repeats,
                                    std::size_t samplesPerAnchor, double delta,
                                    std::uint64_t seed,
                                    Exec exec = default_exec());

void save_growth_table(const RhoGrowthResult& result, const std::string& path);
void save_growth_exponent_json(const RhoGrowthResult& result,
                               const std::string& path);

}  // namespace localfid
