#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "localfid/dataset.hpp"
#include "localfid/explainer.hpp"
#include "localfid/rho.hpp"

namespace localfid {

// Closed-form complexity bound for the affine explainer class with
// coefficient norm at most alpha.
struct ComplexityBound {
  double alpha = 0;
  double maxNorm = 0;  // max intercept-augmented row norm over the sample
  std::size_t m = 0;
  double rStar = 0;    // alpha * maxNorm / sqrt(m)
};

ComplexityBound rademacher_star_linear(const Dataset& sample, double alpha);

// Largest coefficient-vector norm (weights plus intercept) among fitted
// explainers; the measured stand-in for the class constraint alpha.
double measured_alpha(const std::vector<LocalLinearModel>& explainers);

// c * rho * (ln m + 1) * rStar. For squared loss on outputs in [-B, B] the
// contraction constant is c = 4B.
double lemma1_complexity_term(double c, const RhoEstimate& rho,
                              const ComplexityBound& rStar, std::size_t m);

struct BoundReport {
  std::string theorem;  // thm1-full | thm2-full | thm-alt-g
  std::vector<std::pair<std::string, double>> terms;  // raw named inputs
  double rhs = 0;
  std::optional<double> lhsEstimate;
  double lhsStdError = 0;
  double delta = 0;
  double B = 0;
  std::size_t m = 0;
  RhoEstimate rho;
  ComplexityBound complexity;
  std::map<std::string, std::string> provenance;

  double term(const std::string& name) const;
  // whether the observed left side respects the bound, allowing 3 std errors
  // of Monte-Carlo noise on the estimate
  bool holds() const;
};

BoundReport theorem1_rhs(double trainMse, double mnfTest, double mnfTrainAvg,
                         double B, const RhoEstimate& rho,
                         const ComplexityBound& rStar, std::size_t m,
                         double delta);
BoundReport theorem2_rhs(double trainMnf, double B, const RhoEstimate& rho,
                         const ComplexityBound& rStar, std::size_t m,
                         double delta);
BoundReport theorem_alt_g_rhs(double trainMse, double mnfTrainAvg, double B,
                              const RhoEstimate& rho,
                              const ComplexityBound& rStar, std::size_t m,
                              double delta);

void attach_lhs(BoundReport& report, double value, double stdError);

// Re-derives the right side from the stored raw terms and constants along an
// independent code path; reports must match within 1e-12.
double recompute_rhs(const BoundReport& report);

nlohmann::ordered_json bound_report_to_json(const BoundReport& report);
void save_bound_report(const BoundReport& report, const std::string& path);

}  // namespace localfid
