#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "localfid/common.hpp"
#include "localfid/experiment.hpp"

namespace {

using localfid::ExperimentConfig;

// Expands `--config file` into the equivalent flags. Keys mirror the long
// flag names without the leading dashes; values with spaces become repeated
// option values. A key already present on the command line is skipped, so
// explicit flags always win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string configPath;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw localfid::ConfigError("--config needs a file path");
      configPath = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      configPath = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (configPath.empty()) return out;

  std::ifstream in(configPath);
  if (!in) throw localfid::ConfigError("cannot open config file " + configPath);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw localfid::ConfigError(configPath + ":" + std::to_string(lineNo) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw localfid::ConfigError(configPath + ":" + std::to_string(lineNo) +
                                  ": empty key");
    const std::string flag = "--" + key;
    bool onCommandLine = false;
    for (const auto& a : out)
      if (a == flag || a.rfind(flag + "=", 0) == 0) onCommandLine = true;
    if (onCommandLine) continue;
    if (value == "true") {
      out.push_back(flag);
    } else if (value == "false") {
      // flag left unset
    } else {
      out.push_back(flag);
      std::istringstream parts(value);
      std::string piece;
      while (parts >> piece) out.push_back(piece);
    }
  }
  return out;
}

void add_output_options(CLI::App* sub, ExperimentConfig& cfg) {
  sub->add_option("--config", "read key=value defaults from a file")
      ->type_name("FILE");
  sub->add_option("--seed", cfg.seed, "global random seed")
      ->capture_default_str();
  sub->add_option("--out", cfg.outDir,
                  "output directory (env LOCALFID_OUT sets the default)")
      ->envname("LOCALFID_OUT")
      ->capture_default_str();
}

void add_sigma_options(CLI::App* sub, ExperimentConfig& cfg) {
  auto* grid = sub->add_option("--sigma-grid", cfg.sigmaGrid,
                               "explicit neighborhood widths, increasing");
  sub->add_flag("--auto-sigma", cfg.autoSigma,
                "log-spaced widths between the smallest and half the largest "
                "inter-example distance")
      ->excludes(grid);
}

int dispatch(ExperimentConfig& cfg, const std::string& command) {
  if (command == "train") {
    const auto r = localfid::run_train(cfg);
    std::cout << "model: " << r.modelFile << " (" << r.trainRows
              << " training rows)\n"
              << "holdout: " << r.holdoutFile << " (" << r.holdoutRows
              << " rows)\n"
              << "train mse: " << localfid::format_double(r.trainMse) << '\n'
              << "holdout mse: " << localfid::format_double(r.holdoutMse)
              << '\n';
  } else if (command == "sweep-mnf") {
    const auto r = localfid::run_sweep_mnf(cfg);
    std::cout << "sweep: " << r.csvFile << " (" << r.sigmas.size()
              << " widths)\n"
              << "global linear train mnf: "
              << localfid::format_double(r.globalLinearTrainMnf) << '\n';
    for (std::size_t i = 0; i < r.sigmas.size(); ++i)
      std::cout << "sigma " << localfid::format_double(r.sigmas[i])
                << ": train "
                << localfid::format_double(r.trainReports[i].value) << ", test "
                << localfid::format_double(r.testReports[i].value) << '\n';
  } else if (command == "rho-growth") {
    const auto r = localfid::run_rho_growth(cfg);
    std::cout << "table: " << r.tableFile << '\n'
              << "exponents: " << r.jsonFile << '\n';
    for (const auto& res : r.results)
      std::cout << "sigma " << localfid::format_double(res.sigma)
                << ": exponent " << localfid::format_double(res.exponent)
                << " (r2 " << localfid::format_double(res.r2) << ")\n";
    if (r.saturationChecked)
      std::cout << "moderate growth without saturation: "
                << (r.moderateGrowthWithoutSaturation ? "found at sigma " +
                        localfid::format_double(r.flaggedSigma)
                                                      : "not found")
                << '\n';
  } else if (command == "bounds") {
    const auto r = localfid::run_bounds(cfg);
    for (std::size_t i = 0; i < r.reports.size(); ++i) {
      const auto& rep = r.reports[i];
      std::cout << rep.theorem << ": rhs "
                << localfid::format_double(rep.rhs) << ", lhs "
                << localfid::format_double(*rep.lhsEstimate) << " -> "
                << (rep.holds() ? "holds" : "VIOLATED") << " (" << r.files[i]
                << ")\n";
    }
  } else if (command == "toy") {
    const auto r = localfid::run_toy(cfg);
    std::cout << r.report.dump(2) << '\n' << "report: " << r.jsonFile << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  CLI::App app{"local surrogate fidelity and neighborhood overlap toolkit"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand(
      "train", "train a black-box regressor and write a held-out split");
  train->add_option("--data", cfg.dataPath, "input CSV")->required();
  train->add_option("--target", cfg.targetColumn,
                    "target column name or 0-based index")
      ->required();
  train->add_option("--model-kind", cfg.modelKind, "linear or mlp")
      ->capture_default_str();
  train->add_option("--model", cfg.modelPath,
                    "model output path (default <out>/model.txt)");
  train->add_option("--epochs", cfg.trainConfig.epochs, "training epochs")
      ->capture_default_str();
  train->add_option("--learning-rate", cfg.trainConfig.learningRate,
                    "optimizer step size")
      ->capture_default_str();
  train->add_option("--batch-size", cfg.trainConfig.batchSize,
                    "minibatch size")
      ->capture_default_str();
  train->add_option("--l2", cfg.trainConfig.l2Penalty, "l2 penalty")
      ->capture_default_str();
  train->add_option("--hidden", cfg.trainConfig.hiddenWidths,
                    "hidden layer widths (mlp)");
  train->add_option("--train-fraction", cfg.trainFraction,
                    "fraction of rows used for model training")
      ->capture_default_str();

  CLI::App* sweep = app.add_subcommand(
      "sweep-mnf", "train/test explanation fidelity across widths");
  sweep->add_option("--data", cfg.dataPath, "explanation data CSV")->required();
  sweep->add_option("--target", cfg.targetColumn,
                    "target column (optional, ignored by the metrics)");
  sweep->add_option("--model", cfg.modelPath, "trained model file")->required();
  add_sigma_options(sweep, cfg);
  sweep->add_option("--inner-samples", cfg.innerSamples,
                    "source draws per evaluation point")
      ->capture_default_str();
  sweep->add_option("--ridge", cfg.ridge, "explainer ridge")
      ->capture_default_str();
  sweep->add_flag("--override-separation", cfg.overrideSeparation,
                  "proceed even when rows overlap the model's training data");

  CLI::App* growth = app.add_subcommand(
      "rho-growth", "overlap factor growth against anchor count");
  growth->add_option("--data", cfg.dataPath, "anchor data CSV")->required();
  growth->add_option("--target", cfg.targetColumn, "target column (optional)");
  growth->add_option("--model", cfg.modelPath,
                     "model file supplying the standardization (optional)");
  add_sigma_options(growth, cfg);
  growth->add_option("--m-grid", cfg.mGrid,
                     "anchor counts, strictly increasing");
  growth->add_option("--repeats", cfg.repeats, "subsamples per anchor count")
      ->capture_default_str();
  growth->add_option("--samples-per-anchor", cfg.samplesPerAnchor,
                     "MC draws = this times the anchor count")
      ->capture_default_str();
  growth->add_option("--delta", cfg.delta, "confidence level for the tail bound")
      ->capture_default_str();
  growth->add_option("--sweep-csv", cfg.sweepCsvPath,
                     "sweep results to cross-check saturation against");

  CLI::App* bounds = app.add_subcommand(
      "bounds", "evaluate the generalization bounds on held-out data");
  bounds->add_option("--data", cfg.dataPath, "labeled CSV")->required();
  bounds->add_option("--target", cfg.targetColumn, "target column")->required();
  bounds->add_option("--model", cfg.modelPath, "trained model file")
      ->required();
  add_sigma_options(bounds, cfg);
  bounds->add_option("--inner-samples", cfg.innerSamples,
                     "source draws per evaluation point")
      ->capture_default_str();
  bounds->add_option("--delta", cfg.delta, "confidence level")
      ->capture_default_str();
  bounds->add_option("--ridge", cfg.ridge, "explainer ridge")
      ->capture_default_str();
  bounds->add_option("--output-bound", cfg.outputBound,
                     "override the measured output bound B");
  bounds->add_option("--samples-per-anchor", cfg.samplesPerAnchor,
                     "overlap MC draws = this times the sample size")
      ->capture_default_str();
  bounds->add_flag("--override-separation", cfg.overrideSeparation,
                   "proceed even when rows overlap the model's training data");

  CLI::App* toy = app.add_subcommand(
      "toy", "analytic constructions with known optima");
  toy->add_option("--kind", cfg.toyKind,
                  "beta-manifold, correlated-3d, or uniform-overlap")
      ->capture_default_str();
  toy->add_option("--beta", cfg.beta, "toy nonlinearity strength")
      ->capture_default_str();
  toy->add_option("--m", cfg.toyM, "sample / anchor count")
      ->capture_default_str();
  toy->add_option("--atoms", cfg.toyAtoms,
                  "atom universe size (uniform-overlap; 0 picks a default)");
  toy->add_option("--k", cfg.overlapK, "overlap exponent in [0,1]")
      ->capture_default_str();
  toy->add_option("--sigma", cfg.toySigma, "neighborhood width")
      ->capture_default_str();
  toy->add_option("--ridge", cfg.ridge, "explainer ridge")
      ->capture_default_str();

  for (CLI::App* sub : {train, sweep, growth, bounds, toy})
    add_output_options(sub, cfg);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
    for (CLI::App* sub : {train, sweep, growth, bounds, toy})
      if (sub->parsed()) return dispatch(cfg, sub->get_name());
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const localfid::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const localfid::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const localfid::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
