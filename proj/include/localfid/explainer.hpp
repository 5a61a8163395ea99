#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "localfid/dataset.hpp"
#include "localfid/model.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/parallel.hpp"
#include "localfid/rng.hpp"

namespace localfid {

// A local linear surrogate fit at one source point.
struct LocalLinearModel {
  std::vector<double> weights;
  double intercept = 0;
  std::vector<double> sourcePoint;
  double effectiveWeightMass = 0;  // sum of the regression weights used
};

enum class ExplainerKind { mnf_wls, nf_sampling };

std::string to_string(ExplainerKind kind);
ExplainerKind explainer_kind_from_string(const std::string& s);

// Everything needed to produce an explanation at any source point. Holds its
// own copy of the model and caches f(x_i) over the training sample, so fits
// are pure and safe to run concurrently.
struct ExplanationSystem {
  ExplainerKind kind = ExplainerKind::mnf_wls;
  NeighborhoodFamily neighborhood;
  RegressionModel model;
  Dataset trainingSample;
  std::vector<double> cachedPredictions;  // f over trainingSample rows
  double ridge = 1e-8;
  std::size_t nfSampleCount = 1024;
};

ExplanationSystem make_explanation_system(ExplainerKind kind,
                                          RegressionModel model,
                                          NeighborhoodFamily neighborhood,
                                          Dataset trainingSample,
                                          double ridge = 1e-8,
                                          std::size_t nfSampleCount = 1024);

// Ridge least squares on an intercept-augmented design (row-major X, n x d)
// with optional per-example weights (empty = unweighted); the intercept is
// never penalized. The building block both explainer kinds share.
LocalLinearModel fit_weighted_affine(std::span<const double> X, std::size_t n,
                                     std::size_t d, std::span<const double> y,
                                     std::span<const double> w, double ridge,
                                     std::span<const double> source);

// Regression weights w_i = p_{N_{x_i}}(source) over the training sample,
// normalized by the largest log weight before exponentiation. Throws
// DegenerateWeightsError when every weight underflows.
std::vector<double> mnf_weights(const ExplanationSystem& system,
                                std::span<const double> source);

// Closed-form minimizer of sum_i w_i (g(x_i) - f(x_i))^2 + ridge |beta|^2
// over affine g (intercept unpenalized).
LocalLinearModel fit_mnf_explainer(const ExplanationSystem& system,
                                   std::span<const double> source);

// Samples nSamples points from the source's neighborhood, labels them with
// the model, and fits ridge least squares.
LocalLinearModel fit_nf_explainer(const RegressionModel& model,
                                  const NeighborhoodFamily& neighborhood,
                                  std::span<const double> source,
                                  std::size_t nSamples, double ridge,
                                  RngStream& rng);

double explain_at(const LocalLinearModel& g, std::span<const double> x);

// The objective fit_mnf_explainer minimizes, evaluated at an arbitrary g;
// used by tie-checking and brute-force oracle tests.
double weighted_objective(const ExplanationSystem& system,
                          const LocalLinearModel& g,
                          std::span<const double> source);

// One explainer per row of `sources`, fit concurrently, results in row order.
std::vector<LocalLinearModel> fit_mnf_batch(const ExplanationSystem& system,
                                            const Dataset& sources,
                                            Exec exec = default_exec());

void save_explanations(const std::vector<LocalLinearModel>& explanations,
                       const std::vector<std::string>& featureNames,
                       const std::string& path);

}  // namespace localfid
