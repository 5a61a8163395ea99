#include "localfid/bounds.hpp"

#include <cmath>
#include <fstream>

#include "localfid/common.hpp"

namespace localfid {
namespace {

void check_delta(double delta) {
  if (!(delta > 0 && delta < 1)) throw ConfigError("delta must lie in (0,1)");
}

double confidence(double delta, std::size_t m) {
  return std::sqrt(std::log(1.0 / delta) / static_cast<double>(m));
}

void check_nonnegative(const BoundReport& r) {
  for (const auto& [name, v] : r.terms) {
    if (!(v >= 0) || !std::isfinite(v))
      throw NumericError("bound term '" + name + "' is negative or non-finite");
  }
}

}  // namespace

ComplexityBound rademacher_star_linear(const Dataset& sample, double alpha) {
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  if (sample.rows < 1) throw DataError("complexity bound needs a sample");
  double maxSq = 0;
  for (std::size_t i = 0; i < sample.rows; ++i) {
    double sq = 1.0;  // intercept-augmented coordinate
    for (double x : sample.row(i)) sq += x * x;
    maxSq = std::max(maxSq, sq);
  }
  ComplexityBound out;
  out.alpha = alpha;
  out.maxNorm = std::sqrt(maxSq);
  out.m = sample.rows;
  out.rStar =
      alpha * out.maxNorm / std::sqrt(static_cast<double>(sample.rows));
  return out;
}

double measured_alpha(const std::vector<LocalLinearModel>& explainers) {
  if (explainers.empty())
    throw ConfigError("measured alpha needs at least one fitted explainer");
  double maxSq = 0;
  for (const auto& g : explainers) {
    double sq = g.intercept * g.intercept;
    for (double w : g.weights) sq += w * w;
    maxSq = std::max(maxSq, sq);
  }
  return std::sqrt(maxSq);
}

double lemma1_complexity_term(double c, const RhoEstimate& rho,
                              const ComplexityBound& rStar, std::size_t m) {
  if (!(c > 0)) throw ConfigError("contraction constant must be positive");
  return c * rho.value * (std::log(static_cast<double>(m)) + 1.0) *
         rStar.rStar;
}

double BoundReport::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  throw ConfigError("bound report has no term '" + name + "'");
}

bool BoundReport::holds() const {
  if (!lhsEstimate) throw ConfigError("bound report has no left-side estimate");
  return rhs >= *lhsEstimate - 3.0 * lhsStdError;
}

BoundReport theorem1_rhs(double trainMse, double mnfTest, double mnfTrainAvg,
                         double B, const RhoEstimate& rho,
                         const ComplexityBound& rStar, std::size_t m,
                         double delta) {
  check_delta(delta);
  BoundReport r;
  r.theorem = "thm1-full";
  r.delta = delta;
  r.B = B;
  r.m = m;
  r.rho = rho;
  r.complexity = rStar;
  const double complexityTerm = lemma1_complexity_term(16.0 * B, rho, rStar, m);
  const double confidenceTerm = 2.0 * confidence(delta, m);
  r.terms = {{"trainMse", trainMse},
             {"mnfTest", mnfTest},
             {"mnfTrainAvg", mnfTrainAvg},
             {"complexityTerm", complexityTerm},
             {"confidenceTerm", confidenceTerm}};
  check_nonnegative(r);
  r.rhs = 4.0 * trainMse + 2.0 * mnfTest + 4.0 * mnfTrainAvg + complexityTerm +
          confidenceTerm;
  return r;
}

BoundReport theorem2_rhs(double trainMnf, double B, const RhoEstimate& rho,
                         const ComplexityBound& rStar, std::size_t m,
                         double delta) {
  check_delta(delta);
  BoundReport r;
  r.theorem = "thm2-full";
  r.delta = delta;
  r.B = B;
  r.m = m;
  r.rho = rho;
  r.complexity = rStar;
  const double complexityTerm = lemma1_complexity_term(8.0 * B, rho, rStar, m);
  const double confidenceTerm = confidence(delta, m);
  r.terms = {{"trainMnf", trainMnf},
             {"complexityTerm", complexityTerm},
             {"confidenceTerm", confidenceTerm}};
  check_nonnegative(r);
  r.rhs = trainMnf + complexityTerm + confidenceTerm;
  return r;
}

BoundReport theorem_alt_g_rhs(double trainMse, double mnfTrainAvg, double B,
                              const RhoEstimate& rho,
                              const ComplexityBound& rStar, std::size_t m,
                              double delta) {
  check_delta(delta);
  BoundReport r;
  r.theorem = "thm-alt-g";
  r.delta = delta;
  r.B = B;
  r.m = m;
  r.rho = rho;
  r.complexity = rStar;
  const double complexityTerm = lemma1_complexity_term(8.0 * B, rho, rStar, m);
  const double confidenceTerm = confidence(delta, m);
  r.terms = {{"trainMse", trainMse},
             {"mnfTrainAvg", mnfTrainAvg},
             {"complexityTerm", complexityTerm},
             {"confidenceTerm", confidenceTerm}};
  check_nonnegative(r);
  r.rhs = 2.0 * trainMse + 2.0 * mnfTrainAvg + complexityTerm + confidenceTerm;
  return r;
}

void attach_lhs(BoundReport& report, double value, double stdError) {
  if (!std::isfinite(value) || !(stdError >= 0))
    throw NumericError("left-side estimate must be finite with stdError >= 0");
  report.lhsEstimate = value;
  report.lhsStdError = stdError;
}

double recompute_rhs(const BoundReport& report) {
  // rebuilt from primitive fields, not the stored composite terms
  const double lnm1 = std::log(static_cast<double>(report.m)) + 1.0;
  const double conf =
      std::sqrt(std::log(1.0 / report.delta) / static_cast<double>(report.m));
  const double base =
      report.B * report.rho.value * report.complexity.rStar * lnm1;
  if (report.theorem == "thm1-full")
    return 4.0 * report.term("trainMse") + 2.0 * report.term("mnfTest") +
           4.0 * report.term("mnfTrainAvg") + 16.0 * base + 2.0 * conf;
  if (report.theorem == "thm2-full")
    return report.term("trainMnf") + 8.0 * base + conf;
  if (report.theorem == "thm-alt-g")
    return 2.0 * report.term("trainMse") + 2.0 * report.term("mnfTrainAvg") +
           8.0 * base + conf;
  throw ConfigError("unknown theorem '" + report.theorem + "'");
}

nlohmann::ordered_json bound_report_to_json(const BoundReport& report) {
  nlohmann::ordered_json j;
  j["theorem"] = report.theorem;
  j["delta"] = report.delta;
  j["B"] = report.B;
  j["m"] = report.m;
  nlohmann::ordered_json terms = nlohmann::ordered_json::object();
  for (const auto& [name, v] : report.terms) terms[name] = v;
  j["terms"] = terms;
  j["rhs"] = report.rhs;
  if (report.lhsEstimate) {
    j["lhs"] = {{"value", *report.lhsEstimate},
                {"std_error", report.lhsStdError}};
    j["holds"] = report.holds();
  } else {
    j["lhs"] = nullptr;
  }
  nlohmann::ordered_json rho;
  rho["value"] = report.rho.value;
  rho["method"] = to_string(report.rho.method);
  rho["m"] = report.rho.m;
  if (report.rho.method == RhoMethod::monte_carlo) {
    rho["n_samples"] = report.rho.nSamples;
    rho["hoeffding_epsilon"] = report.rho.hoeffdingEpsilon;
    rho["delta"] = report.rho.delta;
    rho["std_error"] = report.rho.stdError;
  }
  j["rho"] = rho;
  j["complexity"] = {{"alpha", report.complexity.alpha},
                     {"max_norm", report.complexity.maxNorm},
                     {"m", report.complexity.m},
                     {"r_star", report.complexity.rStar}};
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j;
}

void save_bound_report(const BoundReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << bound_report_to_json(report).dump(2) << '\n';
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace localfid
