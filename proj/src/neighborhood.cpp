#include "localfid/neighborhood.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "localfid/common.hpp"

namespace localfid {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kAtomMatchTol = 1e-12;

void check_dim(const NeighborhoodFamily& f, std::span<const double> v,
               const char* what) {
  if (v.size() != f.dimension)
    throw ConfigError(std::string(what) + " has dimension " +
                      std::to_string(v.size()) + ", family expects " +
                      std::to_string(f.dimension));
}

bool atom_matches(std::span<const double> atom, std::span<const double> q) {
  for (std::size_t j = 0; j < atom.size(); ++j)
    if (std::abs(atom[j] - q[j]) > kAtomMatchTol) return false;
  return true;
}

// Resolve a coordinate anchor to its support-map slot by exact atom match.
std::size_t resolve_anchor(const NeighborhoodFamily& f,
                           std::span<const double> anchor) {
  for (std::size_t a = 0; a < f.atomCount; ++a)
    if (atom_matches(f.atom(a), anchor)) {
      if (a < f.supportMap.size()) return a;
      break;
    }
  throw ConfigError("anchor does not match any atom of the discrete family");
}

double gaussian_log_density(const NeighborhoodFamily& f,
                            std::span<const double> anchor,
                            std::span<const double> query) {
  double sq = 0;
  for (std::size_t j = 0; j < f.dimension; ++j) {
    const double d = query[j] - anchor[j];
    sq += d * d;
  }
  const double d = static_cast<double>(f.dimension);
  return -d * std::log(f.sigma * std::sqrt(2.0 * std::numbers::pi)) -
         sq / (2.0 * f.sigma * f.sigma);
}

double discrete_log_density(const NeighborhoodFamily& f, std::size_t anchorIdx,
                            std::span<const double> query) {
  const auto& support = f.supportMap[anchorIdx];
  for (std::size_t a : support)
    if (atom_matches(f.atom(a), query))
      return -std::log(static_cast<double>(support.size()));
  return kNegInf;
}

}  // namespace

std::string to_string(NeighborhoodKind kind) {
  switch (kind) {
    case NeighborhoodKind::gaussian_isotropic: return "gaussian-isotropic";
    case NeighborhoodKind::discrete_uniform: return "discrete-uniform";
    case NeighborhoodKind::point_mass: return "point-mass";
  }
  return "?";
}

NeighborhoodKind neighborhood_kind_from_string(const std::string& s) {
  if (s == "gaussian-isotropic") return NeighborhoodKind::gaussian_isotropic;
  if (s == "discrete-uniform") return NeighborhoodKind::discrete_uniform;
  if (s == "point-mass") return NeighborhoodKind::point_mass;
  throw ConfigError("unknown neighborhood kind '" + s + "'");
}

NeighborhoodFamily NeighborhoodFamily::gaussian(std::size_t dimension,
                                                double sigma) {
  NeighborhoodFamily f;
  f.kind = NeighborhoodKind::gaussian_isotropic;
  f.dimension = dimension;
  f.sigma = sigma;
  f.validate();
  return f;
}

NeighborhoodFamily NeighborhoodFamily::point_mass(std::size_t dimension) {
  NeighborhoodFamily f;
  f.kind = NeighborhoodKind::point_mass;
  f.dimension = dimension;
  return f;
}

NeighborhoodFamily NeighborhoodFamily::discrete(
    std::size_t dimension, std::vector<double> atoms,
    std::vector<std::vector<std::size_t>> map) {
  NeighborhoodFamily f;
  f.kind = NeighborhoodKind::discrete_uniform;
  f.dimension = dimension;
  f.atoms = std::move(atoms);
  if (dimension == 0 || f.atoms.size() % dimension != 0)
    throw ConfigError("atom table size is not a multiple of the dimension");
  f.atomCount = f.atoms.size() / dimension;
  f.supportMap = std::move(map);
  f.validate();
  return f;
}

void NeighborhoodFamily::validate() const {
  switch (kind) {
    case NeighborhoodKind::gaussian_isotropic:
      if (!(sigma > 0)) throw ConfigError("gaussian neighborhood needs sigma > 0");
      break;
    case NeighborhoodKind::discrete_uniform:
      for (const auto& support : supportMap) {
        if (support.empty())
          throw ConfigError("discrete neighborhood with empty support set");
        for (std::size_t a : support)
          if (a >= atomCount)
            throw ConfigError("support references atom " + std::to_string(a) +
                              " outside the atom table");
      }
      break;
    case NeighborhoodKind::point_mass:
      break;
  }
}

double log_density(const NeighborhoodFamily& family,
                   std::span<const double> anchor,
                   std::span<const double> query) {
  check_dim(family, anchor, "anchor");
  check_dim(family, query, "query");
  switch (family.kind) {
    case NeighborhoodKind::gaussian_isotropic:
      return gaussian_log_density(family, anchor, query);
    case NeighborhoodKind::discrete_uniform:
      return discrete_log_density(family, resolve_anchor(family, anchor), query);
    case NeighborhoodKind::point_mass:
      throw ConfigError("point-mass neighborhoods have no density");
  }
  throw ConfigError("unreachable neighborhood kind");
}

double log_density_at(const NeighborhoodFamily& family, std::size_t anchorIdx,
                      std::span<const double> query) {
  check_dim(family, query, "query");
  if (family.kind != NeighborhoodKind::discrete_uniform)
    throw ConfigError("anchor-index density only applies to discrete families");
  if (anchorIdx >= family.supportMap.size())
    throw ConfigError("anchor index out of range");
  return discrete_log_density(family, anchorIdx, query);
}

std::vector<double> sample(const NeighborhoodFamily& family,
                           std::span<const double> anchor, RngStream& rng) {
  check_dim(family, anchor, "anchor");
  switch (family.kind) {
    case NeighborhoodKind::gaussian_isotropic: {
      std::vector<double> x(anchor.begin(), anchor.end());
      for (double& xi : x) xi += family.sigma * rng.normal();
      return x;
    }
    case NeighborhoodKind::discrete_uniform:
      return sample_at(family, resolve_anchor(family, anchor), rng);
    case NeighborhoodKind::point_mass:
      return {anchor.begin(), anchor.end()};
  }
  throw ConfigError("unreachable neighborhood kind");
}

std::vector<double> sample_at(const NeighborhoodFamily& family,
                              std::size_t anchorIdx, RngStream& rng) {
  if (family.kind != NeighborhoodKind::discrete_uniform)
    throw ConfigError("anchor-index sampling only applies to discrete families");
  if (anchorIdx >= family.supportMap.size())
    throw ConfigError("anchor index out of range");
  const auto& support = family.supportMap[anchorIdx];
  const std::size_t a = support[rng.uniform_index(support.size())];
  auto atom = family.atom(a);
  return {atom.begin(), atom.end()};
}

std::vector<double> log_density_vector(const NeighborhoodFamily& family,
                                       const Dataset& anchors,
                                       std::span<const double> query) {
  check_dim(family, query, "query");
  if (anchors.cols != family.dimension)
    throw ConfigError("anchor dataset dimension mismatch");
  if (family.kind == NeighborhoodKind::point_mass)
    throw ConfigError("point-mass neighborhoods have no density");
  std::vector<double> out(anchors.rows);
  if (family.kind == NeighborhoodKind::gaussian_isotropic) {
    const double d = static_cast<double>(family.dimension);
    const double norm =
        -d * std::log(family.sigma * std::sqrt(2.0 * std::numbers::pi));
    const double inv2s2 = 1.0 / (2.0 * family.sigma * family.sigma);
    for (std::size_t i = 0; i < anchors.rows; ++i) {
      const double* a = anchors.features.data() + i * anchors.cols;
      double sq = 0;
      for (std::size_t j = 0; j < family.dimension; ++j) {
        const double diff = query[j] - a[j];
        sq += diff * diff;
      }
      out[i] = norm - sq * inv2s2;
    }
  } else {
    for (std::size_t i = 0; i < anchors.rows; ++i)
      out[i] = discrete_log_density(family, resolve_anchor(family, anchors.row(i)),
                                    query);
  }
  return out;
}

}  // namespace localfid
