#pragma once

#include <span>

namespace localfid {

// log(sum exp(v_i)), safe for -inf entries; returns -inf for an empty or
// all -inf input.
double log_sum_exp(std::span<const double> v);

// log(sum exp(2 v_i)); the squared-density sum used by the norm ratio.
double log_sum_exp_doubled(std::span<const double> v);

}  // namespace localfid
