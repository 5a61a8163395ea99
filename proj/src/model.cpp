#include "localfid/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "localfid/common.hpp"
#include "localfid/linalg.hpp"
#include "localfid/rng.hpp"

namespace localfid {
namespace {

// Flat parameter layout per layer: weights row-major (out x in), then biases.
struct MlpShape {
  std::vector<std::size_t> widths;  // input, hidden..., 1

  explicit MlpShape(const RegressionModel& m) {
    widths.push_back(m.inputDim);
    for (std::size_t h : m.hidden) widths.push_back(h);
    widths.push_back(1);
  }
  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
      n += widths[l + 1] * (widths[l] + 1);
    return n;
  }
};

double clamp_output(const RegressionModel& m, double y) {
  if (m.outputClampB) y = std::clamp(y, -*m.outputClampB, *m.outputClampB);
  return y;
}

double mlp_forward(const RegressionModel& m, std::span<const double> x,
                   std::vector<std::vector<double>>* activations = nullptr) {
  const MlpShape shape(m);
  std::vector<double> cur(x.begin(), x.end());
  if (activations) {
    activations->clear();
    activations->push_back(cur);
  }
  const double* p = m.params.data();
  for (std::size_t l = 0; l < shape.layer_count(); ++l) {
    const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = p[out * in + o];  // bias
      const double* w = p + o * in;
      for (std::size_t j = 0; j < in; ++j) s += w[j] * cur[j];
      next[o] = (l + 1 < shape.layer_count()) ? std::tanh(s) : s;
    }
    p += out * (in + 1);
    cur = std::move(next);
    if (activations) activations->push_back(cur);
  }
  return cur[0];
}

RegressionModel train_linear(const Dataset& data, const TrainConfig& config) {
  const std::size_t m = data.rows, d = data.cols;
  const std::size_t n = d + 1;  // intercept-augmented
  std::vector<double> xtx(n * n, 0.0), xty(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = data.features.data() + i * d;
    const double yi = (*data.targets)[i];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) xtx[a * n + b] += xi[a] * xi[b];
      xtx[a * n + d] += xi[a];
      xty[a] += xi[a] * yi;
    }
    for (std::size_t b = 0; b < d; ++b) xtx[d * n + b] += xi[b];
    xtx[d * n + d] += 1.0;
    xty[d] += yi;
  }
  std::vector<double> ridge(n, config.l2Penalty);
  ridge[d] = 0.0;  // intercept unpenalized

  RegressionModel model;
  model.kind = ModelKind::linear;
  model.inputDim = d;
  try {
    model.params = solve_spd(xtx, xty, ridge);
  } catch (const NumericError& e) {
    throw NumericError(std::string("linear training: ") + e.what());
  }

  double loss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = model.predict(data.row(i)) - (*data.targets)[i];
    loss += r * r;
  }
  model.trainLoss = loss / static_cast<double>(m);
  return model;
}

RegressionModel train_mlp(const Dataset& data, const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (config.batchSize < 1 || config.batchSize > data.rows)
    throw ConfigError("batch size must lie in [1, " +
                      std::to_string(data.rows) + "], got " +
                      std::to_string(config.batchSize));
  RegressionModel model;
  model.kind = ModelKind::mlp;
  model.inputDim = data.cols;
  model.hidden = config.hiddenWidths;
  if (model.hidden.empty())
    throw ConfigError("mlp needs at least one hidden layer");
  const MlpShape shape(model);

  RngStream init = RngStream::derive(config.seed, 0xacedu);
  model.params.resize(shape.param_count());
  {
    double* p = model.params.data();
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
      const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
      const double scale = 1.0 / std::sqrt(static_cast<double>(in));
      for (std::size_t k = 0; k < out * in; ++k) p[k] = scale * init.normal();
      for (std::size_t k = 0; k < out; ++k) p[out * in + k] = 0.0;
      p += out * (in + 1);
    }
  }

  const std::size_t m = data.rows;
  const std::size_t np = model.params.size();
  std::vector<double> grad(np), mom(np, 0.0), vel(np, 0.0);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;

  // Adam with bias correction; fixed conventional moment decay rates.
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    RngStream shuffle = RngStream::derive(config.seed, 0xe90c'0000u + epoch);
    for (std::size_t i = m; i > 1; --i)
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    for (std::size_t start = 0; start < m; start += config.batchSize) {
      const std::size_t len = std::min(config.batchSize, m - start);
      const double loss = mlp_loss_and_gradient(
          model, data, {order.data() + start, len}, grad);
      if (!std::isfinite(loss))
        throw NumericError("mlp training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + " (reduce learning rate " +
                           format_double(config.learningRate) + ")");
      if (config.l2Penalty > 0)
        for (std::size_t k = 0; k < np; ++k)
          grad[k] += 2.0 * config.l2Penalty * model.params[k];
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t k = 0; k < np; ++k) {
        mom[k] = b1 * mom[k] + (1 - b1) * grad[k];
        vel[k] = b2 * vel[k] + (1 - b2) * grad[k] * grad[k];
        model.params[k] -= config.learningRate * (mom[k] / c1) /
                           (std::sqrt(vel[k] / c2) + eps);
      }
    }
  }

  double loss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = mlp_forward(model, data.row(i)) - (*data.targets)[i];
    loss += r * r;
  }
  model.trainLoss = loss / static_cast<double>(m);
  if (!std::isfinite(model.trainLoss))
    throw NumericError("mlp training produced a non-finite final loss");
  return model;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear: return "linear";
    case ModelKind::mlp: return "mlp";
    case ModelKind::closed_form: return "closed-form";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear") return ModelKind::linear;
  if (s == "mlp") return ModelKind::mlp;
  if (s == "closed-form") return ModelKind::closed_form;
  throw ConfigError("unknown model kind '" + s + "'");
}

double RegressionModel::predict(std::span<const double> x) const {
  if (x.size() != inputDim)
    throw ConfigError("predict: input has dimension " +
                      std::to_string(x.size()) + ", model expects " +
                      std::to_string(inputDim));
  double y = 0;
  switch (kind) {
    case ModelKind::linear: {
      y = params[inputDim];
      for (std::size_t j = 0; j < inputDim; ++j) y += params[j] * x[j];
      break;
    }
    case ModelKind::mlp:
      y = mlp_forward(*this, x);
      break;
    case ModelKind::closed_form:
      y = closedForm(x);
      break;
  }
  return clamp_output(*this, y);
}

std::size_t RegressionModel::param_count() const {
  if (kind == ModelKind::mlp) return MlpShape(*this).param_count();
  if (kind == ModelKind::linear) return inputDim + 1;
  return 0;
}

RegressionModel RegressionModel::closed(
    std::size_t inputDim, std::function<double(std::span<const double>)> f) {
  RegressionModel m;
  m.kind = ModelKind::closed_form;
  m.inputDim = inputDim;
  m.closedForm = std::move(f);
  return m;
}

RegressionModel train(ModelKind kind, const Dataset& data,
                      const TrainConfig& config) {
  if (!data.targets) throw DataError("training data has no target column");
  if (data.rows == 0) throw DataError("training data is empty");
  switch (kind) {
    case ModelKind::linear: return train_linear(data, config);
    case ModelKind::mlp: return train_mlp(data, config);
    case ModelKind::closed_form:
      throw ConfigError("closed-form models are constructed, not trained");
  }
  throw ConfigError("unreachable model kind");
}

double mlp_loss_and_gradient(const RegressionModel& model, const Dataset& data,
                             std::span<const std::size_t> rows,
                             std::vector<double>& grad) {
  const MlpShape shape(model);
  grad.assign(model.params.size(), 0.0);
  const double invN = 1.0 / static_cast<double>(rows.size());
  double loss = 0;
  std::vector<std::vector<double>> act;
  const std::size_t layers = shape.layer_count();
  for (std::size_t row : rows) {
    const double pred = mlp_forward(model, data.row(row), &act);
    const double resid = pred - (*data.targets)[row];
    loss += resid * resid * invN;

    // Backprop of d(mse)/d(pred) = 2 resid / n through the tanh stack.
    std::vector<double> delta{2.0 * resid * invN};
    // locate the final layer's parameter block
    std::size_t offset = model.params.size();
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = shape.widths[l], out = shape.widths[l + 1];
      offset -= out * (in + 1);
      const double* w = model.params.data() + offset;
      double* g = grad.data() + offset;
      const auto& input = act[l];
      for (std::size_t o = 0; o < out; ++o) {
        g[out * in + o] += delta[o];
        for (std::size_t j = 0; j < in; ++j)
          g[o * in + j] += delta[o] * input[j];
      }
      if (l == 0) break;
      std::vector<double> prev(in, 0.0);
      for (std::size_t j = 0; j < in; ++j) {
        double s = 0;
        for (std::size_t o = 0; o < out; ++o) s += delta[o] * w[o * in + j];
        // act[l] holds tanh outputs of layer l's units
        prev[j] = s * (1.0 - input[j] * input[j]);
      }
      delta = std::move(prev);
    }
  }
  return loss;
}

double fit_output_bound(const RegressionModel& model, const Dataset& data,
                        std::optional<double> userBound) {
  if (userBound) {
    if (*userBound <= 0) throw ConfigError("output bound must be positive");
    return *userBound;
  }
  double hi = 0;
  for (std::size_t i = 0; i < data.rows; ++i)
    hi = std::max(hi, std::abs(model.predict(data.row(i))));
  if (data.targets)
    for (double t : *data.targets) hi = std::max(hi, std::abs(t));
  if (hi == 0) hi = 1.0;  // identically-zero edge: keep the constant positive
  return 1.1 * hi;
}

void save_model(const RegressionModel& model, const std::string& path) {
  if (model.kind == ModelKind::closed_form)
    throw ConfigError("closed-form models cannot be serialized");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "kind " << to_string(model.kind) << '\n';
  out << "input_dim " << model.inputDim << '\n';
  if (model.kind == ModelKind::mlp) {
    out << "hidden";
    for (std::size_t h : model.hidden) out << ' ' << h;
    out << '\n';
  }
  if (model.outputClampB)
    out << "clamp " << format_double(*model.outputClampB) << '\n';
  out << "train_loss " << format_double(model.trainLoss) << '\n';
  auto write_row = [&](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    out << key;
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
  };
  write_row("feature_means", model.featureMeans);
  write_row("feature_stds", model.featureStds);
  if (!model.trainFingerprints.empty()) {
    out << "train_fingerprints " << model.trainFingerprints.size() << '\n';
    for (std::uint64_t fp : model.trainFingerprints) out << fp << '\n';
  }
  out << "params " << model.params.size() << '\n';
  for (double p : model.params) out << format_double(p) << '\n';
  if (!out) throw DataError("write failed for " + path);
}

RegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  RegressionModel model;
  bool sawKind = false, sawDim = false;
  std::string key;
  while (in >> key) {
    if (key == "kind") {
      std::string v;
      in >> v;
      model.kind = model_kind_from_string(v);
      sawKind = true;
    } else if (key == "input_dim") {
      in >> model.inputDim;
      sawDim = true;
    } else if (key == "hidden") {
      std::string rest;
      std::getline(in, rest);
      std::istringstream ss(rest);
      std::size_t h;
      while (ss >> h) model.hidden.push_back(h);
    } else if (key == "clamp") {
      double b;
      in >> b;
      model.outputClampB = b;
    } else if (key == "train_loss") {
      in >> model.trainLoss;
    } else if (key == "feature_means" || key == "feature_stds") {
      std::string rest;
      std::getline(in, rest);
      std::istringstream ss(rest);
      auto& dst = (key == "feature_means") ? model.featureMeans
                                           : model.featureStds;
      double v;
      while (ss >> v) dst.push_back(v);
    } else if (key == "train_fingerprints") {
      std::size_t n;
      in >> n;
      model.trainFingerprints.resize(n);
      for (std::size_t i = 0; i < n; ++i) in >> model.trainFingerprints[i];
    } else if (key == "params") {
      std::size_t n;
      in >> n;
      model.params.resize(n);
      for (std::size_t i = 0; i < n; ++i) in >> model.params[i];
    } else {
      throw DataError(path + ": unknown model file key '" + key + "'");
    }
    if (!in && !in.eof())
      throw DataError(path + ": malformed value after key '" + key + "'");
  }
  if (!sawKind || !sawDim)
    throw DataError(path + ": model file missing kind or input_dim");
  if (model.params.size() != model.param_count())
    throw DataError(path + ": parameter count " +
                    std::to_string(model.params.size()) +
                    " does not match the declared architecture (" +
                    std::to_string(model.param_count()) + ")");
  return model;
}

}  // namespace localfid
