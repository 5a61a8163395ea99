#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "localfid/dataset.hpp"
#include "localfid/explainer.hpp"

namespace localfid {

enum class FidelityMetric { nf, mnf, trainMnf, testMnf, mse };

std::string to_string(FidelityMetric metric);

struct FidelityReport {
  FidelityMetric metric = FidelityMetric::mnf;
  double value = 0;
  double stdError = 0;  // 0 for exact computations
  std::size_t innerSamples = 0;
  std::size_t evalPoints = 0;
  double sigma = 0;
  std::size_t skippedDraws = 0;
  std::size_t totalDraws = 0;
  bool valid = true;  // false when more than 1% of draws were skipped
};

struct PointEstimate {
  double value = 0;
  double stdError = 0;
  std::size_t skipped = 0;
  std::size_t total = 0;
};

enum class MnfMode { automatic, enumerate_support, sample_draws };

// MNF(f, g, x): inner expectation over source points drawn from x's
// neighborhood, each fitting its own explainer and scoring it at x.
// In automatic mode discrete neighborhoods are enumerated exactly (stdError
// from the atom spread) and gaussian ones are Monte-Carlo sampled.
// Degenerate-weight draws are skipped and counted.
PointEstimate mnf_at(const ExplanationSystem& system,
                     const RegressionModel& model, std::span<const double> x,
                     std::size_t innerSamples, RngStream& rng,
                     MnfMode mode = MnfMode::automatic);

// Mean of mnf_at over the rows of evalSet; per-row streams derived from
// `seed` so results do not depend on thread count. Pass trainMnf/testMnf for
// `label` when evalSet is the explanation-training or held-out split.
FidelityReport empirical_mnf(const ExplanationSystem& system,
                             const RegressionModel& model,
                             const Dataset& evalSet, std::size_t innerSamples,
                             std::uint64_t seed, FidelityMetric label,
                             Exec exec = default_exec());

using ExplainerAtSource = std::function<LocalLinearModel(
    std::span<const double> source, RngStream& rng)>;

// NF: sources come from evalSet, targets from each source's neighborhood;
// the explainer fit once per source is scored on its own neighborhood.
FidelityReport empirical_nf(const RegressionModel& model,
                            const ExplainerAtSource& explainerAtSource,
                            const Dataset& evalSet,
                            const NeighborhoodFamily& neighborhood,
                            std::size_t innerSamples, std::uint64_t seed,
                            Exec exec = default_exec());

double mse(const RegressionModel& model, const Dataset& data);

// A fully tabulated finite problem: distribution over K atoms, one
// neighborhood row per atom (row-stochastic), f per atom, and g[source][target].
struct DiscreteMnfCase {
  std::vector<double> dProbs;
  std::vector<std::vector<double>> neighborProbs;
  std::vector<double> fValues;
  std::vector<std::vector<double>> gValues;

  void validate() const;
  std::size_t atom_count() const { return dProbs.size(); }
};

struct SwapIdentity {
  double lhs = 0;  // double expectation, sources inner
  double rhs = 0;  // via the explicitly constructed swapped decomposition
};

// Exact evaluation of the same quantity in both orders of integration; the
// two results agree on every valid case.
SwapIdentity swap_identity_check(const DiscreteMnfCase& c);

void append_fidelity_row(std::ostream& out, const std::string& dataset,
                         const std::string& modelKind,
                         const std::string& explainerKind,
                         const FidelityReport& report, std::uint64_t seed);
void write_fidelity_header(std::ostream& out);

}  // namespace localfid
