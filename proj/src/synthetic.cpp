#include "localfid/synthetic.hpp"

#include <cmath>

#include "localfid/common.hpp"
#include "localfid/rng.hpp"

namespace localfid {
namespace {

// Largest n with |x - n| <= tol, or 0 when x is not close to any integer.
std::size_t near_integer(double x, double tol = 1e-9) {
  const double r = std::round(x);
  if (r < 1 || std::abs(x - r) > tol * std::max(1.0, std::abs(x))) return 0;
  return static_cast<std::size_t>(r);
}

std::function<double(std::span<const double>)> toy_function(double beta) {
  return [beta](std::span<const double> x) {
    return x[0] - beta * x[0] * x[1] * x[1];
  };
}

}  // namespace

std::string to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::beta_manifold: return "beta-manifold";
    case ToyKind::correlated_3d: return "correlated-3d";
    case ToyKind::uniform_overlap: return "uniform-overlap";
  }
  return "?";
}

ToyKind toy_kind_from_string(const std::string& s) {
  if (s == "beta-manifold") return ToyKind::beta_manifold;
  if (s == "correlated-3d") return ToyKind::correlated_3d;
  if (s == "uniform-overlap") return ToyKind::uniform_overlap;
  throw ConfigError("unknown toy kind '" + s + "'");
}

void ToyManifoldSpec::validate() const {
  if (m < 2) throw ConfigError("toy cases need m >= 2");
  if (kind != ToyKind::uniform_overlap) return;
  if (overlapExponent < 0 || overlapExponent > 1)
    throw ConfigError("overlap exponent k must lie in [0, 1]");
  const double mReal = static_cast<double>(m);
  const std::size_t t = near_integer(std::pow(mReal, 1.0 - overlapExponent));
  if (t == 0)
    throw ConfigError(
        "uniform overlap requires m^(1-k) to be a positive integer; m = " +
        std::to_string(m) + ", k = " + format_double(overlapExponent) +
        " gives " + format_double(std::pow(mReal, 1.0 - overlapExponent)));
  if (m % t != 0)
    throw ConfigError("m^(1-k) = " + std::to_string(t) +
                      " must divide m for integral per-atom coverage");
  if (atomUniverse != 0) {
    if (atomUniverse % t != 0)
      throw ConfigError(
          "atom universe M = " + std::to_string(atomUniverse) +
          " must be a multiple of m^(1-k) = " + std::to_string(t));
    if (atomUniverse % m != 0)
      throw ConfigError("atom universe M = " + std::to_string(atomUniverse) +
                        " must be a multiple of m = " + std::to_string(m) +
                        " for the block pattern");
  }
}

ToyCase generate(const ToyManifoldSpec& spec) {
  spec.validate();
  ToyCase out;
  RngStream rng = RngStream::derive(spec.seed, 0x70edull);

  switch (spec.kind) {
    case ToyKind::beta_manifold: {
      Dataset d = Dataset::make(spec.m, 2, "beta-manifold");
      d.targets.emplace(spec.m);
      d.targetName = "f";
      out.trueModel = RegressionModel::closed(2, toy_function(spec.beta));
      for (std::size_t i = 0; i < spec.m; ++i) {
        d.at(i, 0) = rng.normal();
        d.at(i, 1) = 0.0;
        (*d.targets)[i] = out.trueModel.predict(d.row(i));
      }
      out.data = std::move(d);
      return out;
    }
    case ToyKind::correlated_3d: {
      Dataset d = Dataset::make(spec.m, 3, "correlated-3d");
      d.targets.emplace(spec.m);
      d.targetName = "f";
      out.trueModel = RegressionModel::closed(3, toy_function(spec.beta));
      for (std::size_t i = 0; i < spec.m; ++i) {
        const double x1 = rng.normal();
        d.at(i, 0) = x1;
        d.at(i, 1) = 0.0;
        d.at(i, 2) = x1;  // exact copy of column 1
        (*d.targets)[i] = out.trueModel.predict(d.row(i));
      }
      out.data = std::move(d);
      return out;
    }
    case ToyKind::uniform_overlap: {
      const std::size_t t = static_cast<std::size_t>(std::round(
          std::pow(static_cast<double>(spec.m), 1.0 - spec.overlapExponent)));
      const std::size_t M = spec.atomUniverse ? spec.atomUniverse : spec.m * t;
      const std::size_t s = M / t;          // atoms per neighborhood
      const std::size_t stride = M / spec.m;  // block offset per anchor

      std::vector<double> atoms(M);
      for (std::size_t a = 0; a < M; ++a) atoms[a] = static_cast<double>(a);
      std::vector<std::vector<std::size_t>> support(spec.m);
      for (std::size_t i = 0; i < spec.m; ++i) {
        support[i].resize(s);
        for (std::size_t j = 0; j < s; ++j)
          support[i][j] = (i * stride + j) % M;
      }
      out.family =
          NeighborhoodFamily::discrete(1, std::move(atoms), std::move(support));
      out.hasFamily = true;

      Dataset d = Dataset::make(spec.m, 1, "uniform-overlap");
      for (std::size_t i = 0; i < spec.m; ++i)
        d.at(i, 0) = static_cast<double>(i);  // anchors are atoms 0..m-1
      out.data = std::move(d);
      return out;
    }
  }
  throw ConfigError("unreachable toy kind");
}

AnalyticOptima analytic_optima(const ToyManifoldSpec& spec) {
  if (spec.kind != ToyKind::beta_manifold)
    throw ConfigError("analytic optima are defined for the beta-manifold toy");
  AnalyticOptima o;
  o.nfOptimalW1 = 1.0 - spec.beta;
  o.mnfOptimalW1 = 1.0;
  return o;
}

}  // namespace localfid
