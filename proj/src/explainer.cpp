#include "localfid/explainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "localfid/common.hpp"
#include "localfid/linalg.hpp"

namespace localfid {
namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

LocalLinearModel fit_weighted_affine(std::span<const double> X, std::size_t n,
                                     std::size_t d, std::span<const double> y,
                                     std::span<const double> w, double ridge,
                                     std::span<const double> source) {
  const std::size_t p = d + 1;
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (wi == 0) continue;
    const double* xi = X.data() + i * d;
    for (std::size_t a = 0; a < d; ++a) {
      const double wxa = wi * xi[a];
      for (std::size_t b = a; b < d; ++b) xtx[a * p + b] += wxa * xi[b];
      xtx[a * p + d] += wxa;
      xty[a] += wxa * y[i];
    }
    xtx[d * p + d] += wi;
    xty[d] += wi * y[i];
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < a; ++b) xtx[a * p + b] = xtx[b * p + a];

  std::vector<double> lambda(p, ridge);
  lambda[d] = 0.0;  // intercept unpenalized
  std::vector<double> beta = solve_spd(xtx, xty, lambda);

  LocalLinearModel g;
  g.weights.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d));
  g.intercept = beta[d];
  g.sourcePoint.assign(source.begin(), source.end());
  for (double b : beta)
    if (!std::isfinite(b)) throw NumericError("explainer fit is non-finite");
  return g;
}

std::string to_string(ExplainerKind kind) {
  return kind == ExplainerKind::mnf_wls ? "mnf-wls" : "nf-sampling";
}

ExplainerKind explainer_kind_from_string(const std::string& s) {
  if (s == "mnf-wls") return ExplainerKind::mnf_wls;
  if (s == "nf-sampling") return ExplainerKind::nf_sampling;
  throw ConfigError("unknown explainer kind '" + s + "'");
}

ExplanationSystem make_explanation_system(ExplainerKind kind,
                                          RegressionModel model,
                                          NeighborhoodFamily neighborhood,
                                          Dataset trainingSample,
                                          double ridge,
                                          std::size_t nfSampleCount) {
  if (trainingSample.rows == 0)
    throw DataError("explanation system needs a non-empty training sample");
  if (trainingSample.cols != model.inputDim)
    throw ConfigError("training sample dimension does not match the model");
  if (neighborhood.dimension != model.inputDim)
    throw ConfigError("neighborhood dimension does not match the model");
  if (ridge < 0) throw ConfigError("ridge must be nonnegative");
  if (kind == ExplainerKind::mnf_wls &&
      neighborhood.kind == NeighborhoodKind::point_mass)
    throw ConfigError("mnf-wls needs a neighborhood with densities");

  ExplanationSystem sys;
  sys.kind = kind;
  sys.neighborhood = std::move(neighborhood);
  sys.model = std::move(model);
  sys.trainingSample = std::move(trainingSample);
  sys.ridge = ridge;
  sys.nfSampleCount = nfSampleCount;
  sys.cachedPredictions.resize(sys.trainingSample.rows);
  for (std::size_t i = 0; i < sys.trainingSample.rows; ++i)
    sys.cachedPredictions[i] = sys.model.predict(sys.trainingSample.row(i));
  return sys;
}

std::vector<double> mnf_weights(const ExplanationSystem& system,
                                std::span<const double> source) {
  std::vector<double> logw =
      log_density_vector(system.neighborhood, system.trainingSample, source);
  double hi = kNegInf;
  for (double lw : logw) hi = std::max(hi, lw);
  if (hi == kNegInf)
    throw DegenerateWeightsError(
        "all regression weights vanished at this source point");
  double mass = 0;
  for (double& lw : logw) {
    lw = std::exp(lw - hi);
    mass += lw;
  }
  if (!(mass >= 1e-300))
    throw DegenerateWeightsError("regression weight mass underflowed");
  return logw;  // now holds the normalized weights
}

LocalLinearModel fit_mnf_explainer(const ExplanationSystem& system,
                                   std::span<const double> source) {
  if (system.kind != ExplainerKind::mnf_wls)
    throw ConfigError("system is not configured for mnf-wls fitting");
  const std::vector<double> w = mnf_weights(system, source);
  try {
    LocalLinearModel g = fit_weighted_affine(
        system.trainingSample.features, system.trainingSample.rows,
        system.trainingSample.cols, system.cachedPredictions, w, system.ridge,
        source);
    for (double wi : w) g.effectiveWeightMass += wi;
    return g;
  } catch (const DegenerateWeightsError&) {
    throw;
  } catch (const NumericError& e) {
    throw NumericError(std::string("mnf explainer fit: ") + e.what());
  }
}

LocalLinearModel fit_nf_explainer(const RegressionModel& model,
                                  const NeighborhoodFamily& neighborhood,
                                  std::span<const double> source,
                                  std::size_t nSamples, double ridge,
                                  RngStream& rng) {
  const std::size_t d = model.inputDim;
  if (nSamples < d + 1)
    throw ConfigError("nf explainer needs at least d+1 = " +
                      std::to_string(d + 1) + " samples, got " +
                      std::to_string(nSamples));
  std::vector<double> X(nSamples * d), y(nSamples);
  for (std::size_t i = 0; i < nSamples; ++i) {
    const std::vector<double> xi = sample(neighborhood, source, rng);
    std::copy(xi.begin(), xi.end(), X.begin() + static_cast<std::ptrdiff_t>(i * d));
    y[i] = model.predict(xi);
  }
  LocalLinearModel g = fit_weighted_affine(X, nSamples, d, y, {}, ridge, source);
  g.effectiveWeightMass = static_cast<double>(nSamples);
  return g;
}

double explain_at(const LocalLinearModel& g, std::span<const double> x) {
  if (x.size() != g.weights.size())
    throw ConfigError("explain_at: input has dimension " +
                      std::to_string(x.size()) + ", explanation expects " +
                      std::to_string(g.weights.size()));
  double y = g.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) y += g.weights[j] * x[j];
  return y;
}

double weighted_objective(const ExplanationSystem& system,
                          const LocalLinearModel& g,
                          std::span<const double> source) {
  const std::vector<double> w = mnf_weights(system, source);
  double obj = 0;
  for (std::size_t i = 0; i < system.trainingSample.rows; ++i) {
    const double r = explain_at(g, system.trainingSample.row(i)) -
                     system.cachedPredictions[i];
    obj += w[i] * r * r;
  }
  for (double wj : g.weights) obj += system.ridge * wj * wj;
  return obj;
}

std::vector<LocalLinearModel> fit_mnf_batch(const ExplanationSystem& system,
                                            const Dataset& sources,
                                            Exec exec) {
  std::vector<LocalLinearModel> out(sources.rows);
  for_each_index(exec, sources.rows, [&](std::size_t i) {
    out[i] = fit_mnf_explainer(system, sources.row(i));
  });
  return out;
}

void save_explanations(const std::vector<LocalLinearModel>& explanations,
                       const std::vector<std::string>& featureNames,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const std::size_t d = featureNames.size();
  for (std::size_t j = 0; j < d; ++j) out << "source_" << featureNames[j] << ',';
  out << "intercept";
  for (std::size_t j = 0; j < d; ++j) out << ",w_" << featureNames[j];
  out << ",effective_weight_mass\n";
  for (const auto& g : explanations) {
    if (g.sourcePoint.size() != d || g.weights.size() != d)
      throw DataError("explanation dimension does not match the header");
    for (std::size_t j = 0; j < d; ++j)
      out << format_double(g.sourcePoint[j]) << ',';
    out << format_double(g.intercept);
    for (std::size_t j = 0; j < d; ++j) out << ',' << format_double(g.weights[j]);
    out << ',' << format_double(g.effectiveWeightMass) << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace localfid
