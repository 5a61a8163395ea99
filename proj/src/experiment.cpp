#include "localfid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "localfid/common.hpp"
#include "localfid/explainer.hpp"
#include "localfid/neighborhood.hpp"
#include "localfid/rng.hpp"
#include "localfid/synthetic.hpp"

namespace localfid {
namespace {

namespace fs = std::filesystem;

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.outDir);
  return (fs::path(cfg.outDir) / name).string();
}

Dataset load_input(const ExperimentConfig& cfg) {
  if (cfg.dataPath.empty()) throw ConfigError("--data is required");
  return load_csv(cfg.dataPath, cfg.targetColumn);
}

// Refuse rows the model already saw during its own training (the theorems
// require the explanation sample to be fresh) unless explicitly overridden.
void check_separation(const RegressionModel& model, const Dataset& raw,
                      const ExperimentConfig& cfg) {
  if (model.trainFingerprints.empty()) return;
  std::vector<std::uint64_t> mine = row_fingerprints(raw);
  std::vector<std::uint64_t> theirs = model.trainFingerprints;
  std::sort(mine.begin(), mine.end());
  std::sort(theirs.begin(), theirs.end());
  std::vector<std::uint64_t> common;
  std::set_intersection(mine.begin(), mine.end(), theirs.begin(), theirs.end(),
                        std::back_inserter(common));
  if (common.empty()) return;
  if (cfg.overrideSeparation) {
    std::cerr << "warning: " << common.size()
              << " row(s) overlap the model's training data; proceeding "
                 "because --override-separation is set\n";
    return;
  }
  throw DataError(
      std::to_string(common.size()) +
      " row(s) of " + cfg.dataPath +
      " were used to train this model; explanations must be learned on "
      "fresh data (pass --override-separation to proceed anyway)");
}

Dataset standardized_for(const RegressionModel& model, const Dataset& raw) {
  if (!model.featureMeans.empty())
    return apply_standardization(raw, model.featureMeans, model.featureStds);
  return standardize(raw);
}

std::vector<double> resolve_sigma_grid(const ExperimentConfig& cfg,
                                       const Dataset& stdData) {
  std::vector<double> grid = cfg.sigmaGrid;
  if (grid.empty()) {
    if (!cfg.autoSigma)
      throw ConfigError("pass --sigma-grid or --auto-sigma");
    grid = auto_sigma_grid(stdData, cfg.autoSigmaCount, cfg.seed);
  }
  if (grid.empty()) throw ConfigError("sigma grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0)) throw ConfigError("sigma values must be positive");
    if (i && !(grid[i] > grid[i - 1]))
      throw ConfigError("sigma grid must be strictly increasing");
  }
  return grid;
}

// Unweighted affine fit of the model's predictions over `data`; the value g
// saturates to as sigma grows.
LocalLinearModel global_linear_fit(const RegressionModel& model,
                                   const Dataset& data, double ridge) {
  std::vector<double> preds(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i)
    preds[i] = model.predict(data.row(i));
  const std::vector<double> origin(data.cols, 0.0);
  return fit_weighted_affine(data.features, data.rows, data.cols, preds, {},
                             ridge, origin);
}

double mean_sq_explanation_error(const RegressionModel& model,
                                 const LocalLinearModel& g,
                                 const Dataset& data) {
  double s = 0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double e = model.predict(data.row(i)) - explain_at(g, data.row(i));
    s += e * e;
  }
  return s / static_cast<double>(data.rows);
}

struct MeanWithError {
  double value = 0;
  double stdError = 0;
};

MeanWithError mean_with_error(const std::vector<double>& v) {
  MeanWithError out;
  const double n = static_cast<double>(v.size());
  for (double x : v) out.value += x;
  out.value /= n;
  if (v.size() > 1) {
    double varSum = 0;
    for (double x : v) varSum += (x - out.value) * (x - out.value);
    out.stdError = std::sqrt(varSum / (n - 1) / n);
  }
  return out;
}

// lhs of the labeled-explanation theorem: E[(g_{x'}(x) - y)^2] over held-out
// labeled rows, sources drawn from each row's neighborhood.
MeanWithError expected_explanation_error(const ExplanationSystem& system,
                                         const Dataset& test,
                                         std::size_t innerSamples,
                                         std::uint64_t seed) {
  if (!test.targets) throw DataError("labeled test data required");
  std::vector<PointEstimate> pts(test.rows);
  for_each_index(default_exec(), test.rows, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, 0xa17e'0000'0000ull + i);
    const auto x = test.row(i);
    const double y = (*test.targets)[i];
    double sum = 0, sumSq = 0;
    std::size_t ok = 0, skipped = 0;
    for (std::size_t s = 0; s < innerSamples; ++s) {
      const std::vector<double> source = sample(system.neighborhood, x, rng);
      try {
        const LocalLinearModel g = fit_mnf_explainer(system, source);
        const double e = explain_at(g, x) - y;
        sum += e * e;
        sumSq += e * e * e * e;
        ++ok;
      } catch (const DegenerateWeightsError&) {
        ++skipped;
      }
    }
    PointEstimate p;
    p.total = innerSamples;
    p.skipped = skipped;
    if (ok) {
      p.value = sum / static_cast<double>(ok);
      if (ok > 1) {
        const double var =
            (sumSq / static_cast<double>(ok) - p.value * p.value) *
            static_cast<double>(ok) / static_cast<double>(ok - 1);
        p.stdError = var > 0 ? std::sqrt(var / static_cast<double>(ok)) : 0;
      }
    }
    pts[i] = p;
  });
  double sum = 0, varSum = 0;
  std::size_t used = 0;
  for (const auto& p : pts)
    if (p.total > p.skipped) {
      sum += p.value;
      varSum += p.stdError * p.stdError;
      ++used;
    }
  if (used == 0) throw NumericError("every labeled test point failed to fit");
  MeanWithError out;
  out.value = sum / static_cast<double>(used);
  out.stdError = std::sqrt(varSum) / static_cast<double>(used);
  return out;
}

std::string basename_of(const std::string& path) {
  return fs::path(path).filename().string();
}

std::string join_counts(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (i ? " " : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace

std::vector<double> auto_sigma_grid(const Dataset& data, std::size_t count,
                                    std::uint64_t seed) {
  if (count < 2) throw ConfigError("auto sigma grid needs at least 2 points");
  const DistanceRange r = pairwise_distance_range(data, 200000, seed);
  const double lo = r.minDist, hi = r.maxDist / 2.0;
  if (!(lo > 0))
    throw DataError(
        "duplicate rows: zero minimum distance leaves no automatic sigma "
        "range");
  if (!(hi > lo))
    throw DataError("degenerate distance range [" + format_double(lo) + ", " +
                    format_double(hi) + "] for an automatic sigma grid");
  std::vector<double> grid(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                 static_cast<double>(count - 1));
  grid.front() = lo;  // keep endpoints exact
  grid.back() = hi;
  return grid;
}

TrainOutcome run_train(const ExperimentConfig& cfg) {
  const Dataset raw = load_input(cfg);
  if (!raw.targets)
    throw DataError("training requires a target column (--target)");
  const std::vector<std::uint64_t> fp = row_fingerprints(raw);
  const Dataset stdData = standardize(raw);

  SplitSpec split;
  split.fractions = {cfg.trainFraction, 1.0 - cfg.trainFraction};
  split.seed = cfg.seed;
  const auto parts = split_indices(raw.rows, split);
  const Dataset trainStd = take_rows(stdData, parts[0]);
  const Dataset holdStd = take_rows(stdData, parts[1]);

  RegressionModel model =
      train(model_kind_from_string(cfg.modelKind), trainStd, cfg.trainConfig);
  model.featureMeans = stdData.featureMeans;
  model.featureStds = stdData.featureStds;
  model.trainFingerprints.reserve(parts[0].size());
  for (std::size_t i : parts[0]) model.trainFingerprints.push_back(fp[i]);

  TrainOutcome out;
  out.modelFile =
      cfg.modelPath.empty() ? out_path(cfg, "model.txt") : cfg.modelPath;
  save_model(model, out.modelFile);
  out.holdoutFile = out_path(cfg, "holdout.csv");
  save_csv(take_rows(raw, parts[1]), out.holdoutFile);
  out.trainMse = mse(model, trainStd);
  out.holdoutMse = mse(model, holdStd);
  out.trainRows = trainStd.rows;
  out.holdoutRows = holdStd.rows;
  return out;
}

SweepOutcome run_sweep_mnf(const ExperimentConfig& cfg) {
  if (cfg.modelPath.empty()) throw ConfigError("--model is required");
  const RegressionModel model = load_model(cfg.modelPath);
  const Dataset raw = load_input(cfg);
  check_separation(model, raw, cfg);
  const Dataset stdData = standardized_for(model, raw);
  if (stdData.cols != model.inputDim)
    throw DataError("data has " + std::to_string(stdData.cols) +
                    " feature(s) but the model expects " +
                    std::to_string(model.inputDim));

  SplitSpec split;
  split.fractions = {0.5, 0.5};
  split.seed = cfg.seed;
  const auto parts = split_indices(stdData.rows, split);
  const Dataset explTrain = take_rows(stdData, parts[0]);
  const Dataset explTest = take_rows(stdData, parts[1]);

  SweepOutcome out;
  out.sigmas = resolve_sigma_grid(cfg, stdData);

  const LocalLinearModel gGlobal =
      global_linear_fit(model, explTrain, cfg.ridge);
  out.globalLinearTrainMnf =
      mean_sq_explanation_error(model, gGlobal, explTrain);
  out.globalLinearTestMnf = mean_sq_explanation_error(model, gGlobal, explTest);

  out.csvFile = out_path(cfg, "sweep_mnf.csv");
  std::ofstream csv(out.csvFile);
  if (!csv) throw DataError("cannot write " + out.csvFile);
  csv << "# data=" << cfg.dataPath << '\n'
      << "# model=" << cfg.modelPath << '\n'
      << "# seed=" << cfg.seed << '\n'
      << "# inner_samples=" << cfg.innerSamples << '\n'
      << "# ridge=" << format_double(cfg.ridge) << '\n'
      << "# explanation_train_rows=" << explTrain.rows << '\n'
      << "# explanation_test_rows=" << explTest.rows << '\n'
      << "# global_linear_train_mnf=" << format_double(out.globalLinearTrainMnf)
      << '\n'
      << "# global_linear_test_mnf=" << format_double(out.globalLinearTestMnf)
      << '\n';
  csv << "# sigma_grid=";
  for (std::size_t i = 0; i < out.sigmas.size(); ++i)
    csv << (i ? " " : "") << format_double(out.sigmas[i]);
  csv << '\n';
  write_fidelity_header(csv);

  for (std::size_t si = 0; si < out.sigmas.size(); ++si) {
    const double sigma = out.sigmas[si];
    const NeighborhoodFamily family =
        NeighborhoodFamily::gaussian(stdData.cols, sigma);
    const ExplanationSystem system = make_explanation_system(
        ExplainerKind::mnf_wls, model, family, explTrain, cfg.ridge);
    const FidelityReport trainRep =
        empirical_mnf(system, model, explTrain, cfg.innerSamples,
                      hash_combine(cfg.seed, 2 * si), FidelityMetric::trainMnf);
    const FidelityReport testRep = empirical_mnf(
        system, model, explTest, cfg.innerSamples,
        hash_combine(cfg.seed, 2 * si + 1), FidelityMetric::testMnf);
    append_fidelity_row(csv, basename_of(cfg.dataPath), to_string(model.kind),
                        to_string(ExplainerKind::mnf_wls), trainRep, cfg.seed);
    append_fidelity_row(csv, basename_of(cfg.dataPath), to_string(model.kind),
                        to_string(ExplainerKind::mnf_wls), testRep, cfg.seed);
    out.trainReports.push_back(trainRep);
    out.testReports.push_back(testRep);
  }
  if (!csv) throw DataError("write failed for " + out.csvFile);
  return out;
}

GrowthOutcome run_rho_growth(const ExperimentConfig& cfg) {
  const Dataset raw = load_input(cfg);
  Dataset stdData = raw;
  if (!cfg.modelPath.empty()) {
    const RegressionModel model = load_model(cfg.modelPath);
    stdData = standardized_for(model, raw);
  } else {
    stdData = standardize(raw);
  }

  GrowthOutcome out;
  out.sigmas = resolve_sigma_grid(cfg, stdData);

  std::vector<std::size_t> mGrid = cfg.mGrid;
  if (mGrid.empty()) {
    for (std::size_t div : {8, 4, 2, 1}) {
      const std::size_t m = stdData.rows / div;
      if (m >= 2 && (mGrid.empty() || m > mGrid.back())) mGrid.push_back(m);
    }
    if (mGrid.size() < 2)
      throw DataError("dataset too small for a default anchor grid");
  }

  for (std::size_t si = 0; si < out.sigmas.size(); ++si) {
    const NeighborhoodFamily family =
        NeighborhoodFamily::gaussian(stdData.cols, out.sigmas[si]);
    out.results.push_back(rho_growth_exponent(
        stdData, family, mGrid, cfg.repeats, cfg.samplesPerAnchor, cfg.delta,
        hash_combine(cfg.seed, 0x9704ull + si)));
  }

  out.tableFile = out_path(cfg, "growth_table.csv");
  {
    std::ofstream csv(out.tableFile);
    if (!csv) throw DataError("cannot write " + out.tableFile);
    csv << "# data=" << cfg.dataPath << '\n'
        << "# model=" << cfg.modelPath << '\n'
        << "# seed=" << cfg.seed << '\n'
        << "# repeats=" << cfg.repeats << '\n'
        << "# samples_per_anchor=" << cfg.samplesPerAnchor << '\n'
        << "# delta=" << format_double(cfg.delta) << '\n'
        << "# m_grid=" << join_counts(mGrid) << '\n';
    csv << "m,rho,std_error,sigma,seed\n";
    for (const auto& res : out.results)
      for (const auto& row : res.rows)
        csv << row.m << ',' << format_double(row.rho) << ','
            << format_double(row.stdError) << ',' << format_double(res.sigma)
            << ',' << cfg.seed << '\n';
    if (!csv) throw DataError("write failed for " + out.tableFile);
  }

  nlohmann::ordered_json j;
  j["config"] = {{"data", cfg.dataPath},
                 {"seed", cfg.seed},
                 {"repeats", cfg.repeats},
                 {"samples_per_anchor", cfg.samplesPerAnchor},
                 {"delta", cfg.delta}};
  nlohmann::ordered_json perSigma = nlohmann::ordered_json::array();
  for (const auto& res : out.results) {
    nlohmann::ordered_json e;
    e["sigma"] = res.sigma;
    e["slope"] = res.exponent;
    e["intercept"] = res.intercept;
    e["r2"] = res.r2;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& row : res.rows)
      table.push_back({{"m", row.m},
                       {"rho", row.rho},
                       {"std_error", row.stdError}});
    e["table"] = table;
    perSigma.push_back(e);
  }
  j["per_sigma"] = perSigma;

  if (!cfg.sweepCsvPath.empty()) {
    // pull per-sigma train MNF and the saturation reference out of a
    // previous sweep run
    std::ifstream sweep(cfg.sweepCsvPath);
    if (!sweep) throw DataError("cannot open " + cfg.sweepCsvPath);
    double globalRef = -1;
    std::vector<std::pair<double, double>> trainMnf;  // sigma -> value
    std::string line;
    while (std::getline(sweep, line)) {
      const std::string tag = "# global_linear_train_mnf=";
      if (line.rfind(tag, 0) == 0) {
        globalRef = std::stod(line.substr(tag.size()));
        continue;
      }
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 7 || cells[4] != "train_mnf") continue;
      trainMnf.emplace_back(std::stod(cells[3]), std::stod(cells[5]));
    }
    if (globalRef < 0)
      throw DataError(cfg.sweepCsvPath +
                      " has no global_linear_train_mnf provenance line");
    out.saturationChecked = true;
    nlohmann::ordered_json sat;
    sat["global_linear_train_mnf"] = globalRef;
    for (const auto& res : out.results) {
      for (const auto& [sig, value] : trainMnf) {
        if (std::abs(sig - res.sigma) >
            1e-9 * std::max(1.0, std::abs(res.sigma)))
          continue;
        const bool unsaturated = value < 0.5 * globalRef;
        if (res.exponent <= 0.3 && unsaturated &&
            !out.moderateGrowthWithoutSaturation) {
          out.moderateGrowthWithoutSaturation = true;
          out.flaggedSigma = res.sigma;
          out.flaggedExponent = res.exponent;
          sat["sigma"] = res.sigma;
          sat["exponent"] = res.exponent;
          sat["train_mnf"] = value;
        }
      }
    }
    sat["found"] = out.moderateGrowthWithoutSaturation;
    j["moderate_growth_without_saturation"] = sat;
  }

  out.jsonFile = out_path(cfg, "growth_exponents.json");
  std::ofstream jf(out.jsonFile);
  if (!jf) throw DataError("cannot write " + out.jsonFile);
  jf << j.dump(2) << '\n';
  if (!jf) throw DataError("write failed for " + out.jsonFile);
  return out;
}

BoundsOutcome run_bounds(const ExperimentConfig& cfg) {
  if (cfg.modelPath.empty()) throw ConfigError("--model is required");
  if (!(cfg.delta > 0 && cfg.delta < 1))
    throw ConfigError("delta must lie in (0,1)");
  const RegressionModel model = load_model(cfg.modelPath);
  const Dataset raw = load_input(cfg);
  if (!raw.targets)
    throw DataError("bound evaluation requires labeled data (--target)");
  check_separation(model, raw, cfg);
  const Dataset stdData = standardized_for(model, raw);
  if (stdData.cols != model.inputDim)
    throw DataError("data does not match the model's input dimension");

  SplitSpec split;
  split.fractions = {0.5, 0.5};
  split.seed = cfg.seed;
  const auto parts = split_indices(stdData.rows, split);
  const Dataset sampleS = take_rows(stdData, parts[0]);
  const Dataset testT = take_rows(stdData, parts[1]);
  const std::size_t m = sampleS.rows;

  double sigma = 0;
  if (!cfg.sigmaGrid.empty()) {
    sigma = cfg.sigmaGrid.front();
    if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  } else if (cfg.autoSigma) {
    const DistanceRange r = pairwise_distance_range(stdData, 200000, cfg.seed);
    sigma = std::exp(0.5 * (std::log(r.minDist) + std::log(r.maxDist / 2.0)));
  } else {
    throw ConfigError("pass --sigma-grid or --auto-sigma");
  }

  const NeighborhoodFamily family =
      NeighborhoodFamily::gaussian(stdData.cols, sigma);
  const ExplanationSystem system = make_explanation_system(
      ExplainerKind::mnf_wls, model, family, sampleS, cfg.ridge);

  const double trainMse = mse(model, sampleS);
  const FidelityReport trainMnfRep =
      empirical_mnf(system, model, sampleS, cfg.innerSamples,
                    hash_combine(cfg.seed, 0xb001ull), FidelityMetric::trainMnf);
  const FidelityReport testMnfRep =
      empirical_mnf(system, model, testT, cfg.innerSamples,
                    hash_combine(cfg.seed, 0xb002ull), FidelityMetric::testMnf);
  const double B = fit_output_bound(model, stdData, cfg.outputBound);

  const std::vector<LocalLinearModel> explainers =
      fit_mnf_batch(system, sampleS);
  const double alpha = measured_alpha(explainers);
  const ComplexityBound comp = rademacher_star_linear(sampleS, alpha);
  const RhoEstimate rho =
      rho_monte_carlo(sampleS, family, cfg.samplesPerAnchor * m, cfg.delta,
                      hash_combine(cfg.seed, 0xb003ull));

  // test MSE of f with an MC-style standard error over test rows
  std::vector<double> sqErr(testT.rows);
  for (std::size_t i = 0; i < testT.rows; ++i) {
    const double e = model.predict(testT.row(i)) - (*testT.targets)[i];
    sqErr[i] = e * e;
  }
  const MeanWithError testMse = mean_with_error(sqErr);
  const MeanWithError gError = expected_explanation_error(
      system, testT, cfg.innerSamples, hash_combine(cfg.seed, 0xb004ull));

  BoundReport thm1 = theorem1_rhs(trainMse, testMnfRep.value,
                                  trainMnfRep.value, B, rho, comp, m, cfg.delta);
  attach_lhs(thm1, testMse.value, testMse.stdError);
  BoundReport thm2 =
      theorem2_rhs(trainMnfRep.value, B, rho, comp, m, cfg.delta);
  attach_lhs(thm2, testMnfRep.value, testMnfRep.stdError);
  BoundReport altg = theorem_alt_g_rhs(trainMse, trainMnfRep.value, B, rho,
                                       comp, m, cfg.delta);
  attach_lhs(altg, gError.value, gError.stdError);

  for (BoundReport* r : {&thm1, &thm2, &altg}) {
    r->provenance["data"] = cfg.dataPath;
    r->provenance["model"] = cfg.modelPath;
    r->provenance["sigma"] = format_double(sigma);
    r->provenance["seed"] = std::to_string(cfg.seed);
    r->provenance["inner_samples"] = std::to_string(cfg.innerSamples);
    r->provenance["sample_rows"] = std::to_string(m);
    r->provenance["test_rows"] = std::to_string(testT.rows);
    r->provenance["alpha"] =
        "measured max explainer coefficient norm = " + format_double(alpha);
    r->provenance["B"] = cfg.outputBound
                             ? "user-supplied " + format_double(B)
                             : "measured post hoc from unclamped outputs and "
                               "targets, inflated 10% = " +
                                   format_double(B);
    r->provenance["rho_samples"] = std::to_string(rho.nSamples);
  }

  BoundsOutcome out;
  const std::pair<const char*, BoundReport*> files[] = {
      {"bound_thm1.json", &thm1},
      {"bound_thm2.json", &thm2},
      {"bound_thm_alt_g.json", &altg}};
  out.allHold = true;
  for (const auto& [name, rep] : files) {
    const std::string path = out_path(cfg, name);
    save_bound_report(*rep, path);
    out.files.push_back(path);
    out.reports.push_back(*rep);
    out.allHold = out.allHold && rep->holds();
  }
  return out;
}

ToyOutcome run_toy(const ExperimentConfig& cfg) {
  ToyManifoldSpec spec;
  spec.kind = toy_kind_from_string(cfg.toyKind);
  spec.beta = cfg.beta;
  spec.m = cfg.toyM;
  spec.atomUniverse = cfg.toyAtoms;
  spec.overlapExponent = cfg.overlapK;
  spec.seed = cfg.seed;

  nlohmann::ordered_json j;
  j["kind"] = cfg.toyKind;
  j["m"] = spec.m;
  j["seed"] = spec.seed;

  const ToyCase toy = generate(spec);
  switch (spec.kind) {
    case ToyKind::beta_manifold: {
      j["beta"] = spec.beta;
      j["sigma"] = cfg.toySigma;
      const NeighborhoodFamily family =
          NeighborhoodFamily::gaussian(2, cfg.toySigma);
      const ExplanationSystem system =
          make_explanation_system(ExplainerKind::mnf_wls, toy.trueModel,
                                  family, toy.data, cfg.ridge);
      const std::vector<double> origin(2, 0.0);
      const LocalLinearModel mnfG = fit_mnf_explainer(system, origin);

      RngStream rng = RngStream::derive(cfg.seed, 0x0f17ull);
      const LocalLinearModel nfG =
          fit_nf_explainer(toy.trueModel, NeighborhoodFamily::gaussian(2, 1.0),
                           origin, 100000, cfg.ridge, rng);

      const AnalyticOptima opt = analytic_optima(spec);
      j["mnf_explainer"] = {{"w1", mnfG.weights[0]},
                            {"w2", mnfG.weights[1]},
                            {"intercept", mnfG.intercept}};
      j["nf_explainer"] = {{"w1", nfG.weights[0]},
                           {"w2", nfG.weights[1]},
                           {"intercept", nfG.intercept}};
      j["analytic"] = {{"mnf_w1", opt.mnfOptimalW1},
                       {"nf_w1", opt.nfOptimalW1}};
      const std::vector<double> probe{1.0, 0.0};
      const double f1 = toy.trueModel.predict(probe);
      auto sq = [](double v) { return v * v; };
      j["on_manifold_sq_error_at_x1_1"] = {
          {"mnf", sq(f1 - explain_at(mnfG, probe))},
          {"nf", sq(f1 - explain_at(nfG, probe))}};
      break;
    }
    case ToyKind::correlated_3d: {
      j["beta"] = spec.beta;
      j["sigma"] = cfg.toySigma;
      const NeighborhoodFamily family =
          NeighborhoodFamily::gaussian(3, cfg.toySigma);
      // ridge 0 so the three tied explanations score identically
      const ExplanationSystem system = make_explanation_system(
          ExplainerKind::mnf_wls, toy.trueModel, family, toy.data, 0.0);
      const std::vector<double> origin(3, 0.0);
      auto objective = [&](std::vector<double> w) {
        LocalLinearModel g;
        g.weights = std::move(w);
        g.intercept = 0;
        return weighted_objective(system, g, origin);
      };
      const double o1 = objective({1, 0, 0});
      const double o2 = objective({0, 0, 1});
      const double o3 = objective({-1, 0, 2});
      j["tied_explanations"] = {{"x1", o1}, {"x3", o2}, {"mix", o3}};
      j["max_objective_spread"] =
          std::max({o1, o2, o3}) - std::min({o1, o2, o3});
      break;
    }
    case ToyKind::uniform_overlap: {
      const std::size_t M = toy.family.atomCount;
      j["atom_universe"] = M;
      j["k"] = spec.overlapExponent;
      const RhoEstimate rho = rho_exact_discrete(toy.data, toy.family);
      const double analytic = std::pow(static_cast<double>(spec.m),
                                       (1.0 - spec.overlapExponent) / 2.0);
      j["rho"] = rho.value;
      j["analytic_rho"] = analytic;
      j["abs_error"] = std::abs(rho.value - analytic);
      break;
    }
  }

  ToyOutcome out;
  out.report = std::move(j);
  out.jsonFile = out_path(cfg, "toy_report.json");
  std::ofstream jf(out.jsonFile);
  if (!jf) throw DataError("cannot write " + out.jsonFile);
  jf << out.report.dump(2) << '\n';
  if (!jf) throw DataError("write failed for " + out.jsonFile);
  return out;
}

}  // namespace localfid
