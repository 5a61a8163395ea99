#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "localfid/bounds.hpp"
#include "localfid/dataset.hpp"
#include "localfid/fidelity.hpp"
#include "localfid/model.hpp"
#include "localfid/rho.hpp"

namespace localfid {

// One flat bag of settings shared by all commands; each command reads the
// fields it documents and ignores the rest.
struct ExperimentConfig {
  std::string dataPath;
  std::string targetColumn;
  std::string modelPath;  // written by train, read by sweep-mnf/bounds
  std::string modelKind = "mlp";
  TrainConfig trainConfig;
  double trainFraction = 0.5;

  std::vector<double> sigmaGrid;
  bool autoSigma = false;
  std::size_t autoSigmaCount = 10;
  std::vector<std::size_t> mGrid;
  std::size_t innerSamples = 256;
  double delta = 0.05;
  std::uint64_t seed = 0;
  std::string outDir = ".";
  bool overrideSeparation = false;
  double ridge = 1e-8;
  std::optional<double> outputBound;

  std::size_t repeats = 5;
  std::size_t samplesPerAnchor = 10;
  std::string sweepCsvPath;  // optional: cross-check growth vs sweep results

  std::string toyKind = "beta-manifold";
  double beta = 5.0;
  std::size_t toyM = 200;
  std::size_t toyAtoms = 0;
  double overlapK = 0.5;
  double toySigma = 1.0;
};

// minDist .. maxDist/2, log-spaced, inclusive endpoints
std::vector<double> auto_sigma_grid(const Dataset& data, std::size_t count,
                                    std::uint64_t seed);

struct TrainOutcome {
  std::string modelFile;
  std::string holdoutFile;
  double trainMse = 0;
  double holdoutMse = 0;
  std::size_t trainRows = 0;
  std::size_t holdoutRows = 0;
};
TrainOutcome run_train(const ExperimentConfig& cfg);

struct SweepOutcome {
  std::string csvFile;
  std::vector<double> sigmas;
  std::vector<FidelityReport> trainReports;
  std::vector<FidelityReport> testReports;
  double globalLinearTrainMnf = 0;  // saturation reference, sigma-free
  double globalLinearTestMnf = 0;
};
SweepOutcome run_sweep_mnf(const ExperimentConfig& cfg);

struct GrowthOutcome {
  std::string tableFile;
  std::string jsonFile;
  std::vector<double> sigmas;
  std::vector<RhoGrowthResult> results;
  bool saturationChecked = false;
  bool moderateGrowthWithoutSaturation = false;
  double flaggedSigma = 0;
  double flaggedExponent = 0;
};
GrowthOutcome run_rho_growth(const ExperimentConfig& cfg);

struct BoundsOutcome {
  std::vector<std::string> files;
  std::vector<BoundReport> reports;  // thm1-full, thm2-full, thm-alt-g
  bool allHold = false;
};
BoundsOutcome run_bounds(const ExperimentConfig& cfg);

struct ToyOutcome {
  std::string jsonFile;
  nlohmann::ordered_json report;
};
ToyOutcome run_toy(const ExperimentConfig& cfg);

}  // namespace localfid
