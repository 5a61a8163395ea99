#pragma once

#include <cstdint>
#include <string>

#include "localfid/dataset.hpp"
#include "localfid/model.hpp"
#include "localfid/neighborhood.hpp"

namespace localfid {

enum class ToyKind { beta_manifold, correlated_3d, uniform_overlap };

std::string to_string(ToyKind kind);
ToyKind toy_kind_from_string(const std::string& s);

struct ToyManifoldSpec {
  ToyKind kind = ToyKind::beta_manifold;
  double beta = 5.0;           // beta-manifold / correlated-3d
  std::size_t m = 0;           // sample / anchor count
  std::size_t atomUniverse = 0;  // M, uniform-overlap; 0 = pick a default
  double overlapExponent = 0.5;  // k in [0,1], uniform-overlap
  std::uint64_t seed = 0;

  void validate() const;
};

struct ToyCase {
  Dataset data;
  RegressionModel trueModel;   // closed form; unused for uniform-overlap
  NeighborhoodFamily family;   // discrete universe for uniform-overlap
  bool hasFamily = false;
};

ToyCase generate(const ToyManifoldSpec& spec);

struct AnalyticOptima {
  double nfOptimalW1 = 0;   // 1 - beta
  double mnfOptimalW1 = 0;  // 1
};

AnalyticOptima analytic_optima(const ToyManifoldSpec& spec);

}  // namespace localfid
