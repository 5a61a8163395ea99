#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "localfid/dataset.hpp"
#include "localfid/rng.hpp"

namespace localfid {

enum class NeighborhoodKind { gaussian_isotropic, discrete_uniform, point_mass };

std::string to_string(NeighborhoodKind kind);
NeighborhoodKind neighborhood_kind_from_string(const std::string& s);

// A family x -> N_x of local distributions. Gaussian neighborhoods are
// symmetric in (anchor, query), so the mirrored family coincides with the
// plain one and both density directions share this type.
//
// Immutable after construction; density/sampling are pure given a stream.
struct NeighborhoodFamily {
  NeighborhoodKind kind = NeighborhoodKind::gaussian_isotropic;
  double sigma = 1.0;     // per-coordinate std; gaussian only
  std::size_t dimension = 0;

  // discrete-uniform state: a shared atom table plus, per anchor index,
  // the atoms that carry equal mass 1/|support|.
  std::vector<double> atoms;  // row-major, atomCount x dimension
  std::size_t atomCount = 0;
  std::vector<std::vector<std::size_t>> supportMap;  // anchor -> atom ids

  std::span<const double> atom(std::size_t a) const {
    return {atoms.data() + a * dimension, dimension};
  }

  static NeighborhoodFamily gaussian(std::size_t dimension, double sigma);
  static NeighborhoodFamily point_mass(std::size_t dimension);
  static NeighborhoodFamily discrete(std::size_t dimension,
                                     std::vector<double> atoms,
                                     std::vector<std::vector<std::size_t>> map);

  void validate() const;
};

// log p_{N_anchor}(query). Discrete anchors are addressed by index into the
// support map; coordinate anchors resolve to an index by exact atom match.
double log_density(const NeighborhoodFamily& family,
                   std::span<const double> anchor,
                   std::span<const double> query);
double log_density_at(const NeighborhoodFamily& family, std::size_t anchorIdx,
                      std::span<const double> query);

std::vector<double> sample(const NeighborhoodFamily& family,
                           std::span<const double> anchor, RngStream& rng);
std::vector<double> sample_at(const NeighborhoodFamily& family,
                              std::size_t anchorIdx, RngStream& rng);

// log p_{N_{x_i}}(query) for every anchor row of `anchors`, one pass.
std::vector<double> log_density_vector(const NeighborhoodFamily& family,
                                       const Dataset& anchors,
                                       std::span<const double> query);

}  // namespace localfid
