#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "localfid/common.hpp"
#include "localfid/dataset.hpp"
#include "localfid/explainer.hpp"
#include "localfid/fidelity.hpp"
#include "localfid/model.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/rng.hpp"
#include "test_support.hpp"

using localfid::ConfigError;
using localfid::Dataset;
using localfid::DiscreteMnfCase;
using localfid::empirical_mnf;
using localfid::empirical_nf;
using localfid::ExplainerKind;
using localfid::FidelityMetric;
using localfid::FidelityReport;
using localfid::make_explanation_system;
using localfid::MnfMode;
using localfid::mnf_at;
using localfid::NeighborhoodFamily;
using localfid::PointEstimate;
using localfid::RegressionModel;
using localfid::RngStream;
using localfid::swap_identity_check;
using testsupport::random_dataset;

namespace {

Dataset atoms_1d(std::initializer_list<double> xs) {
  Dataset d = Dataset::make(xs.size(), 1, "atoms");
  std::size_t i = 0;
  for (double x : xs) d.at(i++, 0) = x;
  return d;
}

}  // namespace

TEST_CASE("discrete enumeration reproduces a fully hand-solved case") {
  // atoms at 0,1,2 with f = (5,1,2); anchor supports {0,1,2}, {1,2}, {2}.
  // Enumerating at x = 0:
  //   source 0 -> only anchor 0 keeps weight -> constant fit 5 -> error 0
  //   source 1 -> two points interpolated exactly -> error 0
  //   source 2 -> weights (1/3,1/2,1), WLS line 15/4 - 13x/12 -> error
  //               (5 - 15/4)^2 = 25/16
  const auto family = NeighborhoodFamily::discrete(
      1, {0.0, 1.0, 2.0}, {{0, 1, 2}, {1, 2}, {2}});
  auto f = RegressionModel::closed(1, [](std::span<const double> x) {
    return 5.0 - 6.5 * x[0] + 2.5 * x[0] * x[0];
  });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f, family,
                                     atoms_1d({0, 1, 2}), /*ridge=*/0.0);
  RngStream rng(1);
  const std::vector<double> x{0.0};
  const PointEstimate p = mnf_at(sys, sys.model, x, 1, rng);
  CHECK(p.total == 3);
  CHECK(p.skipped == 0);
  const double e2 = 25.0 / 16.0;
  CHECK(p.value == doctest::Approx(e2 / 3.0).epsilon(1e-9));
  CHECK(p.stdError == doctest::Approx(e2 * std::sqrt(2.0 / 27.0)).epsilon(1e-9));

  // enumeration needs a discrete family and an anchor point
  const std::vector<double> notAnchor{0.5};
  CHECK_THROWS_AS(mnf_at(sys, sys.model, notAnchor, 1, rng), ConfigError);
  auto gsys = make_explanation_system(
      ExplainerKind::mnf_wls, f, NeighborhoodFamily::gaussian(1, 1.0),
      atoms_1d({0, 1, 2}));
  CHECK_THROWS_AS(
      mnf_at(gsys, gsys.model, x, 4, rng, MnfMode::enumerate_support),
      ConfigError);
  CHECK_THROWS_AS(mnf_at(gsys, gsys.model, x, 0, rng), ConfigError);
}

TEST_CASE("an affine model is explained perfectly") {
  const Dataset train = random_dataset(30, 2, 81);
  RegressionModel lin;
  lin.kind = localfid::ModelKind::linear;
  lin.inputDim = 2;
  lin.params = {1.5, -0.5, 2.0};
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, lin,
                                     NeighborhoodFamily::gaussian(2, 0.7),
                                     train, /*ridge=*/0.0);
  RngStream rng(82);
  const std::vector<double> x{0.2, -0.3};
  const PointEstimate p = mnf_at(sys, sys.model, x, 50, rng);
  CHECK(p.value < 1e-12);
  CHECK(p.stdError < 1e-12);
  CHECK(p.skipped == 0);
}

TEST_CASE("estimates at different sample counts agree statistically") {
  const Dataset train = random_dataset(25, 2, 83);
  auto model = RegressionModel::closed(2, [](std::span<const double> x) {
    return std::sin(2 * x[0]) + 0.5 * x[1] * x[1];
  });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, model,
                                     NeighborhoodFamily::gaussian(2, 0.6),
                                     train);
  const std::vector<double> x{0.4, 0.1};
  RngStream r1(84), r2(85);
  const PointEstimate a = mnf_at(sys, sys.model, x, 10000, r1);
  const PointEstimate b = mnf_at(sys, sys.model, x, 100000, r2);
  const double gap = std::abs(a.value - b.value);
  const double se = std::sqrt(a.stdError * a.stdError + b.stdError * b.stdError);
  CHECK(gap <= 3 * se);
  CHECK(a.stdError > b.stdError);  // more draws, tighter estimate
}

TEST_CASE("a singleton evaluation set reduces to one mnf_at call") {
  const Dataset train = random_dataset(20, 2, 86);
  auto model = RegressionModel::closed(
      2, [](std::span<const double> x) { return x[0] * x[1]; });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, model,
                                     NeighborhoodFamily::gaussian(2, 0.8),
                                     train);
  Dataset one = Dataset::make(1, 2, "eval");
  one.at(0, 0) = 0.3;
  one.at(0, 1) = -0.6;
  const std::uint64_t seed = 99;
  const FidelityReport r = empirical_mnf(sys, sys.model, one, 64, seed,
                                         FidelityMetric::testMnf);
  RngStream direct = RngStream::derive(seed, 0x3a0f'0000'0000ull);
  const PointEstimate p = mnf_at(sys, sys.model, one.row(0), 64, direct);
  CHECK(r.value == p.value);
  CHECK(r.stdError == doctest::Approx(p.stdError).epsilon(1e-15));
  CHECK(r.metric == FidelityMetric::testMnf);
  CHECK(r.evalPoints == 1);
  CHECK(r.innerSamples == 64);
  CHECK(r.sigma == 0.8);
  CHECK(r.valid);
}

TEST_CASE("tiny sigma makes the training sample explain itself") {
  Dataset train = Dataset::make(30, 1, "grid");
  for (std::size_t i = 0; i < 30; ++i)
    train.at(i, 0) = -2.0 + 4.0 * static_cast<double>(i) / 29.0;
  auto model = RegressionModel::closed(
      1, [](std::span<const double> x) { return std::sin(3 * x[0]); });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, model,
                                     NeighborhoodFamily::gaussian(1, 1e-3),
                                     train);
  const FidelityReport r =
      empirical_mnf(sys, sys.model, train, 20, 7, FidelityMetric::trainMnf);
  CHECK(r.value < 1e-4);
  CHECK(r.skippedDraws == 0);
  CHECK(r.valid);
}

TEST_CASE("mse matches hand arithmetic") {
  Dataset d = atoms_1d({1, 2, 3});
  d.targets = std::vector<double>{1.0, 2.5, 2.0};
  const auto ident = RegressionModel::closed(
      1, [](std::span<const double> x) { return x[0]; });
  // errors 0, 0.25, 1 -> mean 1.25/3
  CHECK(localfid::mse(ident, d) == 1.25 / 3.0);

  Dataset untargeted = atoms_1d({1});
  CHECK_THROWS_AS(localfid::mse(ident, untargeted), localfid::DataError);
}

TEST_CASE("both integration orders agree on discrete cases") {
  // single atom: plain squared error
  DiscreteMnfCase one;
  one.dProbs = {1.0};
  one.neighborProbs = {{1.0}};
  one.fValues = {2.0};
  one.gValues = {{3.0}};
  const auto s1 = swap_identity_check(one);
  CHECK(s1.lhs == 1.0);
  CHECK(s1.rhs == 1.0);

  // a source with zero marginal mass simply drops out
  DiscreteMnfCase dead;
  dead.dProbs = {0.5, 0.5};
  dead.neighborProbs = {{1.0, 0.0}, {1.0, 0.0}};
  dead.fValues = {1.0, -1.0};
  dead.gValues = {{0.0, 0.0}, {0.0, 0.0}};
  const auto s2 = swap_identity_check(dead);
  CHECK(s2.lhs == doctest::Approx(s2.rhs).epsilon(1e-12));
  CHECK(s2.lhs == doctest::Approx(1.0).epsilon(1e-12));  // (1^2 + 1^2) / 2

  // random tabulated cases, including a shared-proposal family
  RngStream rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(4);
    DiscreteMnfCase c;
    auto dist = [&] {
      std::vector<double> p(k);
      double s = 0;
      for (double& v : p) s += (v = 0.05 + rng.uniform());
      for (double& v : p) v /= s;
      return p;
    };
    c.dProbs = dist();
    const bool shared = trial % 3 == 0;
    const std::vector<double> common = dist();
    for (std::size_t i = 0; i < k; ++i) {
      c.neighborProbs.push_back(shared ? common : dist());
      c.fValues.push_back(rng.normal());
      std::vector<double> row(k);
      for (double& v : row) v = rng.normal();
      c.gValues.push_back(row);
    }
    const auto s = swap_identity_check(c);
    CHECK(s.lhs == doctest::Approx(s.rhs).epsilon(1e-12));
  }
}

TEST_CASE("malformed discrete cases are rejected") {
  DiscreteMnfCase c;
  c.dProbs = {0.5, 0.5};
  c.neighborProbs = {{1.0, 0.0}, {0.3, 0.7}};
  c.fValues = {0.0, 1.0};
  c.gValues = {{0.0, 0.0}, {0.0, 0.0}};
  c.validate();  // baseline is fine

  DiscreteMnfCase bad = c;
  bad.dProbs = {0.5, 0.6};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sum to 1"),
                       ConfigError);
  bad = c;
  bad.neighborProbs[1] = {-0.3, 1.3};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("negative"),
                       ConfigError);
  bad = c;
  bad.gValues[0] = {0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.fValues.pop_back();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("too many skipped draws invalidate the report") {
  // training anchor is atom 1 only; sources 0 and 2 give it zero weight and
  // are skipped, so 2 of 3 draws fail the 1% budget
  const auto family = NeighborhoodFamily::discrete(
      1, {0.0, 1.0, 2.0}, {{0, 1, 2}, {1}, {2}});
  auto f = RegressionModel::closed(
      1, [](std::span<const double> x) { return 4.0 - 3.0 * x[0]; });
  auto sys = make_explanation_system(ExplainerKind::mnf_wls, f, family,
                                     atoms_1d({1}));
  const FidelityReport r = empirical_mnf(sys, sys.model, atoms_1d({0}), 1, 5,
                                         FidelityMetric::mnf);
  CHECK(r.totalDraws == 3);
  CHECK(r.skippedDraws == 2);
  CHECK_FALSE(r.valid);
  // the surviving draw fits the constant f(1) = 1, error (4 - 1)^2 at x = 0
  CHECK(r.value == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("sampling-based nf is exact for an affine model") {
  const Dataset eval = random_dataset(6, 2, 93);
  RegressionModel lin;
  lin.kind = localfid::ModelKind::linear;
  lin.inputDim = 2;
  lin.params = {2.0, -1.0, 0.5};
  const auto nbhd = NeighborhoodFamily::gaussian(2, 0.5);
  const auto fitter = [&](std::span<const double> src, RngStream& rng) {
    return localfid::fit_nf_explainer(lin, nbhd, src, 64, 0.0, rng);
  };
  const FidelityReport r = empirical_nf(lin, fitter, eval, nbhd, 32, 94);
  CHECK(r.metric == FidelityMetric::nf);
  CHECK(r.value < 1e-12);
  CHECK(r.stdError < 1e-12);
  CHECK(r.evalPoints == 6);
  CHECK(r.totalDraws == 6 * 32);
}

TEST_CASE("fidelity rows serialize with the fixed header") {
  std::ostringstream out;
  localfid::write_fidelity_header(out);
  CHECK(out.str() ==
        "dataset,model,explainer,sigma,metric,value,std_error,inner_samples,"
        "eval_points,skipped_draws,valid,seed\n");

  FidelityReport r;
  r.metric = FidelityMetric::trainMnf;
  r.value = 0.25;
  r.stdError = 0.125;
  r.innerSamples = 16;
  r.evalPoints = 4;
  r.sigma = 0.5;
  r.totalDraws = 64;
  std::ostringstream row;
  localfid::append_fidelity_row(row, "demo", "mlp", "mnf-wls", r, 77);
  CHECK(row.str() == "demo,mlp,mnf-wls,0.5,train_mnf,0.25,0.125,16,4,0,1,77\n");
}
