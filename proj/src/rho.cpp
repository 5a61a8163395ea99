#include "localfid/rho.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "localfid/common.hpp"
#include "localfid/logspace.hpp"
#include "localfid/rng.hpp"

namespace localfid {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t resolve_discrete_anchor(const NeighborhoodFamily& f,
                                    std::span<const double> row) {
  for (std::size_t a = 0; a < f.atomCount && a < f.supportMap.size(); ++a) {
    bool match = true;
    auto atom = f.atom(a);
    for (std::size_t j = 0; j < atom.size() && match; ++j)
      match = std::abs(atom[j] - row[j]) <= 1e-12;
    if (match) return a;
  }
  throw ConfigError("anchor row does not match any atom of the discrete family");
}

}  // namespace

std::string to_string(RhoMethod method) {
  switch (method) {
    case RhoMethod::exact_discrete: return "exact-discrete";
    case RhoMethod::quadrature: return "quadrature";
    case RhoMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

double hoeffding_epsilon(std::size_t m, std::size_t nSamples, double delta) {
  if (!(delta > 0 && delta < 1)) throw ConfigError("delta must lie in (0,1)");
  if (nSamples == 0) throw ConfigError("hoeffding epsilon needs samples");
  return std::sqrt(static_cast<double>(m) * std::log(2.0 / delta) /
                   (2.0 * static_cast<double>(nSamples)));
}

double hoeffding_tail(std::size_t m, std::size_t nSamples, double t) {
  return 2.0 * std::exp(-2.0 * static_cast<double>(nSamples) * t * t /
                        static_cast<double>(m));
}

double rho_ratio_from_log_densities(std::span<const double> logDensities) {
  const std::size_t m = logDensities.size();
  const double hi = *std::max_element(logDensities.begin(), logDensities.end());
  if (hi == kNegInf)
    throw NumericError("sample point has zero density under every anchor");
  double s1 = 0, s2 = 0;
  for (double l : logDensities) {
    const double e = std::exp(l - hi);
    s1 += e;
    s2 += e * e;
  }
  // sqrt(m)*|p|_2/|p|_1 with the common exp(hi) factor cancelled; the
  // sqrt(m*s2) form keeps the all-equal and fully-disjoint extremes exact.
  return std::sqrt(static_cast<double>(m) * s2) / s1;
}

RhoEstimate rho_exact_discrete(const Dataset& anchors,
                               const NeighborhoodFamily& family) {
  if (family.kind != NeighborhoodKind::discrete_uniform)
    throw ConfigError("exact rho needs a discrete-uniform family");
  if (anchors.rows == 0) throw DataError("exact rho needs at least one anchor");
  const std::size_t m = anchors.rows;

  // accumulate sum_i Pr_i[x' = atom]^2 per atom of the universe
  std::vector<double> sumSq(family.atomCount, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = resolve_discrete_anchor(family, anchors.row(i));
    const auto& support = family.supportMap[a];
    const double p = 1.0 / static_cast<double>(support.size());
    for (std::size_t atom : support) sumSq[atom] += p * p;
  }
  double rho = 0;
  for (double s : sumSq)
    if (s > 0) rho += std::sqrt(s / static_cast<double>(m));

  RhoEstimate est;
  est.value = rho;
  est.method = RhoMethod::exact_discrete;
  est.m = m;
  return est;
}

RhoEstimate rho_quadrature(const Dataset& anchors,
                           const NeighborhoodFamily& family,
                           double gridHalfWidthSigmas,
                           std::size_t pointsPerAxis) {
  if (family.kind != NeighborhoodKind::gaussian_isotropic)
    throw ConfigError("quadrature rho needs a gaussian family");
  const std::size_t d = family.dimension;
  if (d > 2) throw ConfigError("quadrature rho supports d <= 2 only");
  if (anchors.rows == 0) throw DataError("quadrature rho needs anchors");
  if (pointsPerAxis == 0) pointsPerAxis = d == 1 ? 512 : 256;
  if (pointsPerAxis < 64) throw ConfigError("pointsPerAxis must be >= 64");

  const std::size_t m = anchors.rows;
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], anchors.at(i, j));
      hi[j] = std::max(hi[j], anchors.at(i, j));
    }
  const double pad = gridHalfWidthSigmas * family.sigma;
  for (std::size_t j = 0; j < d; ++j) {
    lo[j] -= pad;
    hi[j] += pad;
  }

  const std::size_t n = pointsPerAxis;
  auto coord = [&](std::size_t j, std::size_t k) {
    return lo[j] + (hi[j] - lo[j]) * static_cast<double>(k) /
                       static_cast<double>(n - 1);
  };
  auto trap = [&](std::size_t k) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
  const double logM = std::log(static_cast<double>(m));

  double integral = 0;
  std::vector<double> q(d);
  if (d == 1) {
    const double h = (hi[0] - lo[0]) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
      q[0] = coord(0, k);
      const auto ld = log_density_vector(family, anchors, q);
      integral +=
          trap(k) * h * std::exp(0.5 * (log_sum_exp_doubled(ld) - logM));
    }
  } else {
    const double hx = (hi[0] - lo[0]) / static_cast<double>(n - 1);
    const double hy = (hi[1] - lo[1]) / static_cast<double>(n - 1);
    for (std::size_t kx = 0; kx < n; ++kx) {
      q[0] = coord(0, kx);
      double rowSum = 0;
      for (std::size_t ky = 0; ky < n; ++ky) {
        q[1] = coord(1, ky);
        const auto ld = log_density_vector(family, anchors, q);
        rowSum +=
            trap(ky) * hy * std::exp(0.5 * (log_sum_exp_doubled(ld) - logM));
      }
      integral += trap(kx) * hx * rowSum;
    }
  }

  RhoEstimate est;
  est.value = integral;
  est.method = RhoMethod::quadrature;
  est.m = m;
  return est;
}

RhoEstimate rho_monte_carlo(const Dataset& anchors,
                            const NeighborhoodFamily& family,
                            std::size_t nSamples, double delta,
                            std::uint64_t seed, Exec exec) {
  if (family.kind == NeighborhoodKind::point_mass)
    throw ConfigError("monte-carlo rho needs a family with densities");
  if (nSamples < 1) throw ConfigError("monte-carlo rho needs at least 1 sample");
  if (anchors.rows == 0) throw DataError("monte-carlo rho needs anchors");
  const std::size_t m = anchors.rows;

  std::vector<double> ratios(nSamples);
  for_each_index(exec, nSamples, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, 0x4b0c'0000'0000ull + i);
    const std::size_t anchor = rng.uniform_index(m);
    std::vector<double> x;
    if (family.kind == NeighborhoodKind::discrete_uniform) {
      const std::size_t a =
          resolve_discrete_anchor(family, anchors.row(anchor));
      x = sample_at(family, a, rng);
    } else {
      x = sample(family, anchors.row(anchor), rng);
    }
    ratios[i] = rho_ratio_from_log_densities(
        log_density_vector(family, anchors, x));
  });

  double sum = 0;
  for (double r : ratios) sum += r;  // index order, exec independent
  const double mean = sum / static_cast<double>(nSamples);
  double varSum = 0;
  for (double r : ratios) varSum += (r - mean) * (r - mean);

  RhoEstimate est;
  est.value = mean;
  est.method = RhoMethod::monte_carlo;
  est.nSamples = nSamples;
  est.delta = delta;
  est.hoeffdingEpsilon = hoeffding_epsilon(m, nSamples, delta);
  est.m = m;
  est.stdError =
      nSamples > 1
          ? std::sqrt(varSum / static_cast<double>(nSamples - 1) /
                      static_cast<double>(nSamples))
          : 0;
  est.minRatio = *std::min_element(ratios.begin(), ratios.end());
  est.maxRatio = *std::max_element(ratios.begin(), ratios.end());
  return est;
}

LineFit fit_log_log_slope(std::span<const double> ms,
                          std::span<const double> rhos) {
  if (ms.size() != rhos.size() || ms.size() < 2)
    throw ConfigError("growth fit needs at least two (m, rho) pairs");
  std::vector<double> lx(ms.size()), ly(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!(ms[i] > 0) || !(rhos[i] > 0))
      throw NumericError("growth fit needs positive m and rho");
    lx[i] = std::log(ms[i]);
    ly[i] = std::log(rhos[i]);
  }
  return fit_line(lx, ly);
}

RhoGrowthResult rho_growth_exponent(const Dataset& data,
                                    const NeighborhoodFamily& family,
                                    const std::vector<std::size_t>& mGrid,
                                    std::size_t repeats,
                                    std::size_t samplesPerAnchor, double delta,
                                    std::uint64_t seed, Exec exec) {
  if (mGrid.size() < 2)
    throw ConfigError("growth grid needs at least two anchor counts");
  for (std::size_t i = 0; i + 1 < mGrid.size(); ++i)
    if (mGrid[i] >= mGrid[i + 1])
      throw ConfigError("growth grid must be strictly increasing");
  if (mGrid.back() > data.rows)
    throw ConfigError("growth grid exceeds the dataset size (" +
                      std::to_string(data.rows) + " rows)");
  if (mGrid.front() < 1) throw ConfigError("growth grid entries must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");

  RhoGrowthResult out;
  out.sigma = family.sigma;
  out.seed = seed;
  for (std::size_t gi = 0; gi < mGrid.size(); ++gi) {
    const std::size_t m = mGrid[gi];
    std::vector<double> values(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
      RngStream pick = RngStream::derive(
          seed, hash_combine(0x6024'0000ull + gi, 0xa11dull + r));
      // partial Fisher-Yates: first m entries form the subsample
      std::vector<std::size_t> idx(data.rows);
      for (std::size_t i = 0; i < data.rows; ++i) idx[i] = i;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + pick.uniform_index(data.rows - i);
        std::swap(idx[i], idx[j]);
      }
      idx.resize(m);
      const Dataset anchors = take_rows(data, idx);
      if (family.kind == NeighborhoodKind::discrete_uniform) {
        values[r] = rho_exact_discrete(anchors, family).value;
      } else {
        const std::uint64_t drawSeed =
            hash_combine(seed, hash_combine(0xd4a3ull + gi, r));
        values[r] = rho_monte_carlo(anchors, family, samplesPerAnchor * m,
                                    delta, drawSeed, exec)
                        .value;
      }
    }
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(repeats);
    double varSum = 0;
    for (double v : values) varSum += (v - mean) * (v - mean);
    RhoGrowthRow row;
    row.m = m;
    row.rho = mean;
    row.stdError = repeats > 1
                       ? std::sqrt(varSum / static_cast<double>(repeats - 1) /
                                   static_cast<double>(repeats))
                       : 0;
    out.rows.push_back(row);
  }

  std::vector<double> ms(out.rows.size()), rhos(out.rows.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    ms[i] = static_cast<double>(out.rows[i].m);
    rhos[i] = out.rows[i].rho;
  }
  const LineFit fit = fit_log_log_slope(ms, rhos);
  out.exponent = fit.slope;
  out.intercept = fit.intercept;
  out.r2 = fit.r2;
  return out;
}

void save_growth_table(const RhoGrowthResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "m,rho,std_error,sigma,seed\n";
  for (const auto& row : result.rows)
    out << row.m << ',' << format_double(row.rho) << ','
        << format_double(row.stdError) << ',' << format_double(result.sigma)
        << ',' << result.seed << '\n';
  if (!out) throw DataError("write failed for " + path);
}

void save_growth_exponent_json(const RhoGrowthResult& result,
                               const std::string& path) {
  nlohmann::ordered_json j;
  j["slope"] = result.exponent;
  j["intercept"] = result.intercept;
  j["r2"] = result.r2;
  j["sigma"] = result.sigma;
  j["seed"] = result.seed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json r;
    r["m"] = row.m;
    r["rho"] = row.rho;
    r["std_error"] = row.stdError;
    rows.push_back(r);
  }
  j["table"] = rows;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace localfid
