#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace localfid {

// Error categories map to CLI exit codes: ConfigError -> 2, DataError -> 3,
// NumericError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when every regression weight underflowed to zero (source point
// infinitely far from the sample). Callers in the Monte-Carlo loops catch
// this one specifically and count the draw as skipped.
struct DegenerateWeightsError : NumericError {
  using NumericError::NumericError;
};

// Round-trippable decimal rendering, used by every file writer so that
// reruns with the same seed produce byte-identical outputs.
std::string format_double(double v);

// 64-bit mixer used for stream derivation and row fingerprints.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace localfid
