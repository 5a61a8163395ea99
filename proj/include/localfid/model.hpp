#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "localfid/dataset.hpp"

namespace localfid {

enum class ModelKind { linear, mlp, closed_form };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 200;
  double learningRate = 1e-3;
  std::size_t batchSize = 32;
  std::uint64_t seed = 0;
  double l2Penalty = 0.0;
  std::vector<std::size_t> hiddenWidths = {64, 64};  // mlp only
};

// A trained regressor with a pure, deterministic predict. closed_form wraps
// an arbitrary callable (synthetic ground-truth targets); it cannot be
// serialized.
struct RegressionModel {
  ModelKind kind = ModelKind::linear;
  std::size_t inputDim = 0;
  std::vector<std::size_t> hidden;  // mlp hidden widths
  std::vector<double> params;       // linear: w_1..w_d, intercept; mlp: flat
  std::optional<double> outputClampB;
  std::function<double(std::span<const double>)> closedForm;
  double trainLoss = 0;

  // Values recorded at training time so downstream runs can reproduce the
  // exact preprocessing and detect reuse of training rows.
  std::vector<double> featureMeans;
  std::vector<double> featureStds;
  std::vector<std::uint64_t> trainFingerprints;

  double predict(std::span<const double> x) const;
  std::size_t param_count() const;

  static RegressionModel closed(std::size_t inputDim,
                                std::function<double(std::span<const double>)> f);
};

RegressionModel train(ModelKind kind, const Dataset& data,
                      const TrainConfig& config);

// Forward pass + mean-squared-error gradient over the given rows; returns the
// batch loss. Exposed so the analytic gradient can be checked against finite
// differences.
double mlp_loss_and_gradient(const RegressionModel& model, const Dataset& data,
                             std::span<const std::size_t> rows,
                             std::vector<double>& grad);

// B = 1.1 * max absolute prediction/target over the data, unless the user
// supplied a bound, which wins unchanged.
double fit_output_bound(const RegressionModel& model, const Dataset& data,
                        std::optional<double> userBound = std::nullopt);

void save_model(const RegressionModel& model, const std::string& path);
RegressionModel load_model(const std::string& path);

}  // namespace localfid
