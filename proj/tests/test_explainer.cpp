#include <doctest.h>

#include <cmath>
#include <vector>

#include "localfid/common.hpp"
#include "localfid/dataset.hpp"
#include "localfid/explainer.hpp"
#include "localfid/model.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/rng.hpp"
#include "test_support.hpp"

using localfid::ConfigError;
using localfid::Dataset;
using localfid::DegenerateWeightsError;
using localfid::ExplainerKind;
using localfid::ExplanationSystem;
using localfid::explain_at;
using localfid::fit_mnf_explainer;
using localfid::fit_nf_explainer;
using localfid::fit_weighted_affine;
using localfid::LocalLinearModel;
using localfid::make_explanation_system;
using localfid::NeighborhoodFamily;
using localfid::RegressionModel;
using localfid::RngStream;
using localfid::weighted_objective;
using testsupport::random_dataset;

namespace {

RegressionModel wave_model() {
  return RegressionModel::closed(3, [](std::span<const double> x) {
    return std::sin(x[0]) + x[1] * x[2];
  });
}

// Conjugate gradient on the weighted normal equations; an iterative check on
// the closed-form fit.
std::vector<double> cg_fit(const Dataset& data, const std::vector<double>& preds,
                           const std::vector<double>& w, double ridge) {
  const std::size_t n = data.rows, d = data.cols, p = d + 1;
  std::vector<double> A(p * p, 0.0), c(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> xi(data.row(i).begin(), data.row(i).end());
    xi.push_back(1.0);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) A[a * p + b] += w[i] * xi[a] * xi[b];
      c[a] += w[i] * xi[a] * preds[i];
    }
  }
  for (std::size_t a = 0; a < d; ++a) A[a * p + a] += ridge;

  std::vector<double> theta(p, 0.0), r = c, dir = c, Ad(p);
  double rr = 0;
  for (double v : r) rr += v * v;
  for (int it = 0; it < 200 && rr > 1e-26; ++it) {
    for (std::size_t a = 0; a < p; ++a) {
      Ad[a] = 0;
      for (std::size_t b = 0; b < p; ++b) Ad[a] += A[a * p + b] * dir[b];
    }
    double dAd = 0;
    for (std::size_t a = 0; a < p; ++a) dAd += dir[a] * Ad[a];
    const double alpha = rr / dAd;
    double rr2 = 0;
    for (std::size_t a = 0; a < p; ++a) {
      theta[a] += alpha * dir[a];
      r[a] -= alpha * Ad[a];
      rr2 += r[a] * r[a];
    }
    for (std::size_t a = 0; a < p; ++a) dir[a] = r[a] + (rr2 / rr) * dir[a];
    rr = rr2;
  }
  return theta;
}

}  // namespace

TEST_CASE("two points get their interpolating line") {
  Dataset d = Dataset::make(2, 1, "pair");
  d.at(0, 0) = 0;
  d.at(1, 0) = 1;
  auto f = RegressionModel::closed(
      1, [](std::span<const double> x) { return 3 * x[0] - 1; });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f,
                                     NeighborhoodFamily::gaussian(1, 1.0), d,
                                     /*ridge=*/0.0);
  const std::vector<double> source{0.5};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  CHECK(g.weights[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(g.intercept == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(g.sourcePoint == source);
}

TEST_CASE("weighted fit satisfies its normal equations") {
  const Dataset d = random_dataset(30, 3, 61);
  RngStream rng(62);
  std::vector<double> y(30), w(30);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = rng.normal();
    w[i] = 0.05 + rng.uniform();
  }
  const double ridge = 0.3;
  const std::vector<double> src{0, 0, 0};
  const LocalLinearModel g =
      fit_weighted_affine(d.features, 30, 3, y, w, ridge, src);
  // residual gradient: 2 sum_i w_i r_i x_ia + 2 ridge beta_a = 0
  std::vector<double> grad(4, 0.0);
  for (std::size_t i = 0; i < 30; ++i) {
    const double r = explain_at(g, d.row(i)) - y[i];
    for (std::size_t a = 0; a < 3; ++a) grad[a] += w[i] * r * d.at(i, a);
    grad[3] += w[i] * r;
  }
  for (std::size_t a = 0; a < 3; ++a) grad[a] += ridge * g.weights[a];
  for (double v : grad) CHECK(std::abs(v) < 1e-7);
}

TEST_CASE("regression weights can be rescaled freely at ridge zero") {
  const Dataset d = random_dataset(25, 2, 63);
  RngStream rng(64);
  std::vector<double> y(25), w(25), w10(25);
  for (std::size_t i = 0; i < 25; ++i) {
    y[i] = rng.normal();
    w[i] = 0.1 + rng.uniform();
    w10[i] = 10.0 * w[i];
  }
  const std::vector<double> src{0, 0};
  const auto a = fit_weighted_affine(d.features, 25, 2, y, w, 0.0, src);
  const auto b = fit_weighted_affine(d.features, 25, 2, y, w10, 0.0, src);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(a.weights[j] == doctest::Approx(b.weights[j]).epsilon(1e-9));
  CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-9));
}

TEST_CASE("closed-form fit agrees with a conjugate-gradient solve") {
  const Dataset d = random_dataset(30, 3, 65);
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, wave_model(),
                                     NeighborhoodFamily::gaussian(3, 0.8), d,
                                     /*ridge=*/1e-4);
  const std::vector<double> source{0.2, -0.4, 0.1};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  const std::vector<double> w = localfid::mnf_weights(sys, source);
  const auto theta = cg_fit(d, sys.cachedPredictions, w, sys.ridge);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(g.weights[j] == doctest::Approx(theta[j]).epsilon(1e-6));
  CHECK(g.intercept == doctest::Approx(theta[3]).epsilon(1e-6));
}

TEST_CASE("the fit dominates nearby candidates") {
  const Dataset d = random_dataset(40, 3, 66);
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, wave_model(),
                                     NeighborhoodFamily::gaussian(3, 1.2), d);
  const std::vector<double> source{-0.3, 0.5, 0.0};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  const double best = weighted_objective(sys, g, source);
  RngStream rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    LocalLinearModel h = g;
    for (double& wj : h.weights) wj += 0.01 * rng.normal();
    h.intercept += 0.01 * rng.normal();
    CHECK(weighted_objective(sys, h, source) >= best);
  }
}

TEST_CASE("vanishing sigma pins the fit to the nearest sample") {
  // samples -1, 0, 1 under f(x) = x^2; at sigma 0.01 only x = 0 keeps weight
  Dataset d = Dataset::make(3, 1, "line");
  d.at(0, 0) = -1;
  d.at(1, 0) = 0;
  d.at(2, 0) = 1;
  auto f = RegressionModel::closed(
      1, [](std::span<const double> x) { return x[0] * x[0]; });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f,
                                     NeighborhoodFamily::gaussian(1, 0.01), d);
  const std::vector<double> source{0.25};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  const std::vector<double> zero{0.0};
  CHECK(explain_at(g, zero) == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  CHECK(g.effectiveWeightMass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("huge sigma reduces to the global least-squares fit") {
  const Dataset d = random_dataset(20, 2, 68);
  auto model = RegressionModel::closed(2, [](std::span<const double> x) {
    return std::cos(x[0]) - 0.5 * x[1] * x[1];
  });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, model,
                                     NeighborhoodFamily::gaussian(2, 1e6), d);
  const std::vector<double> source{0.1, 0.2};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  const LocalLinearModel ols = fit_weighted_affine(
      d.features, 20, 2, sys.cachedPredictions, {}, sys.ridge, source);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(g.weights[j] == doctest::Approx(ols.weights[j]).epsilon(1e-4));
  CHECK(g.intercept == doctest::Approx(ols.intercept).epsilon(1e-4));
}

TEST_CASE("on-manifold data recovers the manifold law exactly") {
  // f(x) = x1 - 5 x1 x2^2 restricted to the line (t, 0) is just t
  Dataset d = Dataset::make(20, 2, "manifold");
  for (std::size_t i = 0; i < 20; ++i) {
    d.at(i, 0) = -2.0 + 0.2 * static_cast<double>(i);
    d.at(i, 1) = 0.0;
  }
  auto f = RegressionModel::closed(2, [](std::span<const double> x) {
    return x[0] - 5.0 * x[0] * x[1] * x[1];
  });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f,
                                     NeighborhoodFamily::gaussian(2, 0.5), d,
                                     /*ridge=*/0.0);
  const std::vector<double> source{0.5, 0.0};
  const LocalLinearModel g = fit_mnf_explainer(sys, source);
  CHECK(g.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.weights[1] == 0.0);  // the x2 column is identically zero
  CHECK(g.intercept == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(explain_at(g, d.row(i)) ==
          doctest::Approx(sys.cachedPredictions[i]).epsilon(1e-10));
}

TEST_CASE("collapsed third coordinate produces exact ties") {
  // data on (t, 0, t) under f(x) = x1: the explanations x1, x3, -x1 + 2 x3
  // are indistinguishable on the data, objective exactly zero for all three
  Dataset d = Dataset::make(7, 3, "dup");
  for (std::size_t i = 0; i < 7; ++i) {
    const double t = -1.5 + 0.5 * static_cast<double>(i);
    d.at(i, 0) = t;
    d.at(i, 1) = 0.0;
    d.at(i, 2) = t;
  }
  auto f = RegressionModel::closed(
      3, [](std::span<const double> x) { return x[0]; });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f,
                                     NeighborhoodFamily::gaussian(3, 1.0), d,
                                     /*ridge=*/0.0);
  const std::vector<double> source{0.5, 0.0, 0.5};
  LocalLinearModel a, b, c;
  a.weights = {1, 0, 0};
  b.weights = {0, 0, 1};
  c.weights = {-1, 0, 2};
  const double ja = weighted_objective(sys, a, source);
  const double jb = weighted_objective(sys, b, source);
  const double jc = weighted_objective(sys, c, source);
  CHECK(ja == 0.0);
  CHECK(jb == 0.0);
  CHECK(jc == 0.0);
}

TEST_CASE("sampling explainer needs d+1 points and converges on a linear f") {
  RegressionModel lin;
  lin.kind = localfid::ModelKind::linear;
  lin.inputDim = 2;
  lin.params = {2.0, -1.0, 0.25};
  const auto nbhd = NeighborhoodFamily::gaussian(2, 0.5);
  const std::vector<double> source{1.0, -1.0};
  RngStream rng(70);
  CHECK_THROWS_AS(fit_nf_explainer(lin, nbhd, source, 2, 1e-8, rng),
                  ConfigError);
  const LocalLinearModel g =
      fit_nf_explainer(lin, nbhd, source, 512, 1e-8, rng);
  CHECK(g.weights[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(g.weights[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(g.intercept == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(g.effectiveWeightMass == 512.0);
}

TEST_CASE("explain_at is a plain affine evaluation") {
  LocalLinearModel g;
  g.weights = {1.0, -2.0};
  g.intercept = 0.5;
  const std::vector<double> x{2.0, 1.0};
  CHECK(explain_at(g, x) == 0.5);
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(explain_at(g, bad), ConfigError);
}

TEST_CASE("batch fitting preserves order under both policies") {
  const Dataset train = random_dataset(40, 2, 71);
  const Dataset sources = random_dataset(9, 2, 72);
  auto sys = make_explanation_system(
      ExplainerKind::mnf_wls,
      RegressionModel::closed(
          2, [](std::span<const double> x) { return x[0] * x[0] - x[1]; }),
      NeighborhoodFamily::gaussian(2, 0.9), train);
  const auto serial =
      localfid::fit_mnf_batch(sys, sources, localfid::Exec::serial);
  const auto omp = localfid::fit_mnf_batch(sys, sources, localfid::Exec::openmp);
  REQUIRE(serial.size() == 9);
  REQUIRE(omp.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(serial[i].weights == omp[i].weights);
    CHECK(serial[i].intercept == omp[i].intercept);
    CHECK(serial[i].sourcePoint ==
          std::vector<double>(sources.row(i).begin(), sources.row(i).end()));
    const auto one = fit_mnf_explainer(sys, sources.row(i));
    CHECK(serial[i].weights == one.weights);
  }
}

TEST_CASE("weights degenerate off the discrete support") {
  Dataset d = Dataset::make(2, 1, "atoms");
  d.at(0, 0) = 0;
  d.at(1, 0) = 1;
  const auto nbhd = NeighborhoodFamily::discrete(1, {0.0, 1.0}, {{0}, {1}});
  auto sys = make_explanation_system(
      ExplainerKind::mnf_wls,
      RegressionModel::closed(1, [](std::span<const double> x) { return x[0]; }),
      nbhd, d);
  const std::vector<double> off{0.5};
  CHECK_THROWS_AS(localfid::mnf_weights(sys, off), DegenerateWeightsError);
  CHECK_THROWS_AS(fit_mnf_explainer(sys, off), DegenerateWeightsError);
}

TEST_CASE("system construction rejects mismatched pieces") {
  const Dataset d = random_dataset(10, 2, 73);
  auto f2 = RegressionModel::closed(
      2, [](std::span<const double> x) { return x[0]; });
  auto f3 = RegressionModel::closed(
      3, [](std::span<const double> x) { return x[0]; });
  CHECK_THROWS_AS(
      make_explanation_system(ExplainerKind::mnf_wls, f3,
                              NeighborhoodFamily::gaussian(3, 1.0), d),
      ConfigError);
  CHECK_THROWS_AS(
      make_explanation_system(ExplainerKind::mnf_wls, f2,
                              NeighborhoodFamily::gaussian(3, 1.0), d),
      ConfigError);
  CHECK_THROWS_AS(
      make_explanation_system(ExplainerKind::mnf_wls, f2,
                              NeighborhoodFamily::gaussian(2, 1.0), d, -1.0),
      ConfigError);
  CHECK_THROWS_AS(
      make_explanation_system(ExplainerKind::mnf_wls, f2,
                              NeighborhoodFamily::point_mass(2), d),
      ConfigError);
  Dataset empty = Dataset::make(0, 2, "none");
  CHECK_THROWS_AS(
      make_explanation_system(ExplainerKind::mnf_wls, f2,
                              NeighborhoodFamily::gaussian(2, 1.0), empty),
      localfid::DataError);

  auto nf = make_explanation_system(ExplainerKind::nf_sampling, f2,
                                    NeighborhoodFamily::gaussian(2, 1.0), d);
  const std::vector<double> src{0.0, 0.0};
  CHECK_THROWS_AS(fit_mnf_explainer(nf, src), ConfigError);
}

TEST_CASE("explanation files carry source, weights, and mass") {
  std::vector<LocalLinearModel> gs(2);
  gs[0].weights = {1.5, -0.5};
  gs[0].intercept = 2.0;
  gs[0].sourcePoint = {0.0, 1.0};
  gs[0].effectiveWeightMass = 3.25;
  gs[1].weights = {0.0, 0.0};
  gs[1].intercept = -1.0;
  gs[1].sourcePoint = {1.0, 1.0};
  gs[1].effectiveWeightMass = 1.0;
  testsupport::TempFile f("expl");
  localfid::save_explanations(gs, {"u", "v"}, f.path());
  const Dataset back = localfid::load_csv(f.path(), "");
  REQUIRE(back.rows == 2);
  REQUIRE(back.cols == 6);
  CHECK(back.featureNames[0] == "source_u");
  CHECK(back.featureNames[2] == "intercept");
  CHECK(back.featureNames[3] == "w_u");
  CHECK(back.featureNames[5] == "effective_weight_mass");
  CHECK(back.at(0, 2) == 2.0);
  CHECK(back.at(0, 3) == 1.5);
  CHECK(back.at(1, 5) == 1.0);

  std::vector<LocalLinearModel> short1 = {gs[0]};
  short1[0].weights.pop_back();
  CHECK_THROWS_AS(
      localfid::save_explanations(short1, {"u", "v"}, f.path()),
      localfid::DataError);
}

TEST_CASE("explainer kind names round trip") {
  for (auto k : {ExplainerKind::mnf_wls, ExplainerKind::nf_sampling})
    CHECK(localfid::explainer_kind_from_string(localfid::to_string(k)) == k);
  CHECK_THROWS_AS(localfid::explainer_kind_from_string("shap"), ConfigError);
}
