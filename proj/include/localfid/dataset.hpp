#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "localfid/parallel.hpp"

namespace localfid {

// Immutable after construction; safe to share across concurrent readers.
struct Dataset {
  std::vector<double> features;  // row-major, rows x cols
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::optional<std::vector<double>> targets;
  std::vector<double> featureMeans;  // standardization applied so far
  std::vector<double> featureStds;   // strictly positive
  std::vector<std::string> featureNames;
  std::string targetName;
  std::string name;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols, cols};
  }
  double& at(std::size_t i, std::size_t j) { return features[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const {
    return features[i * cols + j];
  }

  // Blank dataset with identity standardization and generated column names.
  static Dataset make(std::size_t rows, std::size_t cols, std::string name);
};

struct SplitSpec {
  std::vector<double> fractions;  // positive, sum to 1 within 1e-12
  std::uint64_t seed = 0;
};

Dataset load_csv(const std::string& path, const std::string& targetColumn);

// Normalized echo: same header order, target column last.
void save_csv(const Dataset& data, const std::string& path);

// Population (1/m) standard deviation; constant columns get std 1 and map to
// all zeros. Features only unless standardizeTargets is set.
Dataset standardize(const Dataset& data, bool standardizeTargets = false);

// (x - mean) / std per column with externally supplied statistics, e.g. the
// ones a model recorded at training time.
Dataset apply_standardization(const Dataset& data,
                              const std::vector<double>& means,
                              const std::vector<double>& stds);

// Seeded uniform permutation, contiguous slices; floor-allocated sizes with
// the remainder assigned to the earliest parts.
std::vector<std::vector<std::size_t>> split_indices(std::size_t m,
                                                    const SplitSpec& spec);
std::vector<Dataset> split(const Dataset& data, const SplitSpec& spec);
Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& idx);

struct DistanceRange {
  double minDist = 0;
  double maxDist = 0;
  bool exact = true;  // false when estimated from a pair subsample
};

// Smallest and largest inter-example Euclidean distance; exact when
// m(m-1)/2 <= maxPairs, otherwise over a uniform subsample of pairs.
DistanceRange pairwise_distance_range(const Dataset& data,
                                      std::size_t maxPairs, std::uint64_t seed,
                                      Exec exec = default_exec());

// One 64-bit hash per row over the raw feature bit patterns; used to detect
// reuse of model-training rows in the explanation pipeline.
std::vector<std::uint64_t> row_fingerprints(const Dataset& data);

}  // namespace localfid
