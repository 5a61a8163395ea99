#include "localfid/fidelity.hpp"

#include <cmath>
#include <ostream>

#include "localfid/common.hpp"

namespace localfid {
namespace {

LocalLinearModel fit_at(const ExplanationSystem& system,
                        std::span<const double> source, RngStream& rng) {
  if (system.kind == ExplainerKind::mnf_wls)
    return fit_mnf_explainer(system, source);
  return fit_nf_explainer(system.model, system.neighborhood, source,
                          system.nfSampleCount, system.ridge, rng);
}

struct Accumulator {
  double sum = 0, sumSq = 0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sumSq += v * v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  // population variance; callers pick the n or n-1 flavor
  double pop_var() const {
    const double m = mean();
    const double v = sumSq / static_cast<double>(n) - m * m;
    return v > 0 ? v : 0;
  }
  double mc_std_error() const {
    if (n < 2) return 0;
    const double corrected =
        pop_var() * static_cast<double>(n) / static_cast<double>(n - 1);
    return std::sqrt(corrected / static_cast<double>(n));
  }
  double enum_std_error() const {
    return n ? std::sqrt(pop_var() / static_cast<double>(n)) : 0;
  }
};

FidelityReport merge_points(const std::vector<PointEstimate>& pts,
                            FidelityMetric label, std::size_t innerSamples,
                            double sigma) {
  FidelityReport r;
  r.metric = label;
  r.innerSamples = innerSamples;
  r.evalPoints = pts.size();
  r.sigma = sigma;
  double sum = 0, varSum = 0;
  std::size_t used = 0;
  for (const auto& p : pts) {
    r.skippedDraws += p.skipped;
    r.totalDraws += p.total;
    if (p.total > p.skipped) {
      sum += p.value;
      varSum += p.stdError * p.stdError;
      ++used;
    }
  }
  if (used == 0) throw NumericError("every evaluation point failed to fit");
  r.value = sum / static_cast<double>(used);
  r.stdError = std::sqrt(varSum) / static_cast<double>(used);
  r.valid = used == pts.size() &&
            100 * r.skippedDraws <= r.totalDraws;  // at most 1% skipped
  return r;
}

}  // namespace

std::string to_string(FidelityMetric metric) {
  switch (metric) {
    case FidelityMetric::nf: return "nf";
    case FidelityMetric::mnf: return "mnf";
    case FidelityMetric::trainMnf: return "train_mnf";
    case FidelityMetric::testMnf: return "test_mnf";
    case FidelityMetric::mse: return "mse";
  }
  return "?";
}

PointEstimate mnf_at(const ExplanationSystem& system,
                     const RegressionModel& model, std::span<const double> x,
                     std::size_t innerSamples, RngStream& rng, MnfMode mode) {
  if (innerSamples < 1) throw ConfigError("innerSamples must be at least 1");
  const bool enumerate =
      mode == MnfMode::enumerate_support ||
      (mode == MnfMode::automatic &&
       system.neighborhood.kind == NeighborhoodKind::discrete_uniform);
  if (enumerate &&
      system.neighborhood.kind != NeighborhoodKind::discrete_uniform)
    throw ConfigError("only discrete neighborhoods can be enumerated");
  const double fx = model.predict(x);
  PointEstimate out;
  Accumulator acc;

  if (enumerate) {
    // the neighborhood of x is a finite uniform set: enumerate it exactly
    const NeighborhoodFamily& nb = system.neighborhood;
    std::size_t anchorIdx = nb.supportMap.size();
    for (std::size_t a = 0; a < nb.atomCount; ++a) {
      bool match = true;
      auto atom = nb.atom(a);
      for (std::size_t j = 0; j < atom.size() && match; ++j)
        match = std::abs(atom[j] - x[j]) <= 1e-12;
      if (match && a < nb.supportMap.size()) {
        anchorIdx = a;
        break;
      }
    }
    if (anchorIdx == nb.supportMap.size())
      throw ConfigError("evaluation point is not an anchor of the discrete family");
    const auto& support = nb.supportMap[anchorIdx];
    out.total = support.size();
    for (std::size_t a : support) {
      auto atom = nb.atom(a);
      try {
        const LocalLinearModel g = fit_at(system, atom, rng);
        const double e = fx - explain_at(g, x);
        acc.add(e * e);
      } catch (const DegenerateWeightsError&) {
        ++out.skipped;
      }
    }
    if (acc.n) {
      out.value = acc.mean();
      out.stdError = acc.enum_std_error();
    }
    return out;
  }

  out.total = innerSamples;
  for (std::size_t s = 0; s < innerSamples; ++s) {
    const std::vector<double> source = sample(system.neighborhood, x, rng);
    try {
      const LocalLinearModel g = fit_at(system, source, rng);
      const double e = fx - explain_at(g, x);
      acc.add(e * e);
    } catch (const DegenerateWeightsError&) {
      ++out.skipped;
    }
  }
  if (acc.n) {
    out.value = acc.mean();
    out.stdError = acc.mc_std_error();
  }
  return out;
}

FidelityReport empirical_mnf(const ExplanationSystem& system,
                             const RegressionModel& model,
                             const Dataset& evalSet, std::size_t innerSamples,
                             std::uint64_t seed, FidelityMetric label,
                             Exec exec) {
  if (evalSet.rows == 0) throw DataError("empty evaluation set");
  std::vector<PointEstimate> pts(evalSet.rows);
  for_each_index(exec, evalSet.rows, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, 0x3a0f'0000'0000ull + i);
    pts[i] = mnf_at(system, model, evalSet.row(i), innerSamples, rng);
  });
  return merge_points(pts, label, innerSamples, system.neighborhood.sigma);
}

FidelityReport empirical_nf(const RegressionModel& model,
                            const ExplainerAtSource& explainerAtSource,
                            const Dataset& evalSet,
                            const NeighborhoodFamily& neighborhood,
                            std::size_t innerSamples, std::uint64_t seed,
                            Exec exec) {
  if (evalSet.rows == 0) throw DataError("empty evaluation set");
  std::vector<PointEstimate> pts(evalSet.rows);
  for_each_index(exec, evalSet.rows, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, 0x9f0e'0000'0000ull + i);
    const auto x = evalSet.row(i);
    const LocalLinearModel g = explainerAtSource(x, rng);
    Accumulator acc;
    for (std::size_t s = 0; s < innerSamples; ++s) {
      const std::vector<double> target = sample(neighborhood, x, rng);
      const double e = model.predict(target) - explain_at(g, target);
      acc.add(e * e);
    }
    pts[i] = {acc.mean(), acc.mc_std_error(), 0, innerSamples};
  });
  return merge_points(pts, FidelityMetric::nf, innerSamples,
                      neighborhood.sigma);
}

double mse(const RegressionModel& model, const Dataset& data) {
  if (!data.targets) throw DataError("mse needs a target column");
  if (data.rows == 0) throw DataError("mse over an empty dataset");
  double s = 0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double r = model.predict(data.row(i)) - (*data.targets)[i];
    s += r * r;
  }
  return s / static_cast<double>(data.rows);
}

void DiscreteMnfCase::validate() const {
  const std::size_t k = dProbs.size();
  if (k == 0) throw ConfigError("discrete case needs at least one atom");
  auto check_dist = [&](const std::vector<double>& p, const char* what) {
    if (p.size() != k)
      throw ConfigError(std::string(what) + " has wrong length");
    double s = 0;
    for (double v : p) {
      if (v < 0) throw ConfigError(std::string(what) + " has negative mass");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw ConfigError(std::string(what) + " does not sum to 1");
  };
  check_dist(dProbs, "atom distribution");
  if (neighborProbs.size() != k || fValues.size() != k || gValues.size() != k)
    throw ConfigError("discrete case tables have inconsistent sizes");
  for (std::size_t i = 0; i < k; ++i) {
    check_dist(neighborProbs[i], "neighborhood row");
    if (gValues[i].size() != k)
      throw ConfigError("explanation table row has wrong length");
  }
}

SwapIdentity swap_identity_check(const DiscreteMnfCase& c) {
  c.validate();
  const std::size_t k = c.atom_count();
  auto err = [&](std::size_t target, std::size_t source) {
    const double e = c.fValues[target] - c.gValues[source][target];
    return e * e;
  };

  SwapIdentity out;
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t s = 0; s < k; ++s)
      out.lhs += c.dProbs[t] * c.neighborProbs[t][s] * err(t, s);

  // swapped order: marginal over sources, then the conditional over targets
  std::vector<double> marginal(k, 0.0);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t t = 0; t < k; ++t)
      marginal[s] += c.dProbs[t] * c.neighborProbs[t][s];
  for (std::size_t s = 0; s < k; ++s) {
    if (marginal[s] == 0) continue;
    double inner = 0;
    for (std::size_t t = 0; t < k; ++t)
      inner += c.dProbs[t] * c.neighborProbs[t][s] / marginal[s] * err(t, s);
    out.rhs += marginal[s] * inner;
  }
  return out;
}

void write_fidelity_header(std::ostream& out) {
  out << "dataset,model,explainer,sigma,metric,value,std_error,inner_samples,"
         "eval_points,skipped_draws,valid,seed\n";
}

void append_fidelity_row(std::ostream& out, const std::string& dataset,
                         const std::string& modelKind,
                         const std::string& explainerKind,
                         const FidelityReport& report, std::uint64_t seed) {
  out << dataset << ',' << modelKind << ',' << explainerKind << ','
      << format_double(report.sigma) << ',' << to_string(report.metric) << ','
      << format_double(report.value) << ',' << format_double(report.stdError)
      << ',' << report.innerSamples << ',' << report.evalPoints << ','
      << report.skippedDraws << ',' << (report.valid ? 1 : 0) << ',' << seed
      << '\n';
}

}  // namespace localfid
