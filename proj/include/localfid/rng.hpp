#pragma once

#include <cstdint>
#include <cstddef>

#include "localfid/common.hpp"

namespace localfid {

// Small counter-based generator (splitmix64). Every parallel task derives its
// own stream from (global seed, task id), so results do not depend on thread
// count or scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  static RngStream derive(std::uint64_t globalSeed, std::uint64_t streamId) {
    return RngStream(hash_combine(mix64(globalSeed), mix64(streamId)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (one value per call)
  double normal();

  // unbiased uniform index in [0, n), n >= 1
  std::size_t uniform_index(std::size_t n);

 private:
  std::uint64_t state_;
};

}  // namespace localfid
