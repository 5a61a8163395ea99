#include "localfid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "localfid/common.hpp"
#include "localfid/rng.hpp"

namespace localfid {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{}
                                         : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t lineNo,
                  std::size_t colNo, const std::string& path) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw DataError(path + ":" + std::to_string(lineNo) + ": column " +
                    std::to_string(colNo + 1) + ": cannot parse '" + cell +
                    "' as a number");
  if (!std::isfinite(v))
    throw DataError(path + ":" + std::to_string(lineNo) + ": column " +
                    std::to_string(colNo + 1) + ": non-finite value");
  return v;
}

}  // namespace

Dataset Dataset::make(std::size_t rows, std::size_t cols, std::string name) {
  Dataset d;
  d.rows = rows;
  d.cols = cols;
  d.features.assign(rows * cols, 0.0);
  d.featureMeans.assign(cols, 0.0);
  d.featureStds.assign(cols, 1.0);
  d.featureNames.resize(cols);
  for (std::size_t j = 0; j < cols; ++j)
    d.featureNames[j] = "x" + std::to_string(j + 1);
  d.name = std::move(name);
  return d;
}

Dataset load_csv(const std::string& path, const std::string& targetColumn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.front() == '\xEF' && line.size() >= 3 &&
      line[1] == '\xBB' && line[2] == '\xBF')
    line.erase(0, 3);  // strip UTF-8 BOM
  const auto header = split_line(line);
  if (header.empty()) throw DataError(path + ": empty header row");
  for (std::size_t a = 0; a < header.size(); ++a)
    for (std::size_t b = a + 1; b < header.size(); ++b)
      if (header[a] == header[b])
        throw DataError(path + ": duplicate column name '" + header[a] + "'");

  // Resolve the target column by name, or by 0-based index if numeric.
  std::size_t targetIdx = header.size();
  if (!targetColumn.empty()) {
    auto it = std::find(header.begin(), header.end(), targetColumn);
    if (it != header.end()) {
      targetIdx = static_cast<std::size_t>(it - header.begin());
    } else {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(
          targetColumn.data(), targetColumn.data() + targetColumn.size(), idx);
      if (ec == std::errc{} && ptr == targetColumn.data() + targetColumn.size() &&
          idx < header.size()) {
        targetIdx = idx;
      } else {
        throw DataError(path + ": no column named '" + targetColumn + "'");
      }
    }
  }
  const bool hasTarget = targetIdx < header.size();
  if (hasTarget && header.size() < 2)
    throw DataError(path + ": need at least one feature besides the target");

  Dataset d;
  d.name = path;
  d.cols = header.size() - (hasTarget ? 1 : 0);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != targetIdx) d.featureNames.push_back(header[j]);
  if (hasTarget) {
    d.targetName = header[targetIdx];
    d.targets.emplace();
  }

  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineNo) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double v = parse_cell(cells[j], lineNo, j, path);
      if (j == targetIdx)
        d.targets->push_back(v);
      else
        d.features.push_back(v);
    }
    ++d.rows;
  }
  if (d.rows == 0) throw DataError(path + ": no data rows");
  d.featureMeans.assign(d.cols, 0.0);
  d.featureStds.assign(d.cols, 1.0);
  return d;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t j = 0; j < data.cols; ++j) {
    if (j) out << ',';
    out << data.featureNames[j];
  }
  if (data.targets) {
    if (data.cols) out << ',';
    out << (data.targetName.empty() ? "target" : data.targetName);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (j) out << ',';
      out << format_double(data.at(i, j));
    }
    if (data.targets) {
      if (data.cols) out << ',';
      out << format_double((*data.targets)[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

Dataset standardize(const Dataset& data, bool standardizeTargets) {
  Dataset out = data;
  const double m = static_cast<double>(data.rows);
  for (std::size_t j = 0; j < data.cols; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < data.rows; ++i) mean += data.at(i, j);
    mean /= m;
    double var = 0;
    for (std::size_t i = 0; i < data.rows; ++i) {
      const double d = data.at(i, j) - mean;
      var += d * d;
    }
    var /= m;
    const double sd = var > 0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < data.rows; ++i)
      out.at(i, j) = (data.at(i, j) - mean) / sd;
    // compose with any standardization already applied
    out.featureMeans[j] = data.featureMeans[j] + mean * data.featureStds[j];
    out.featureStds[j] = data.featureStds[j] * sd;
  }
  if (standardizeTargets && data.targets) {
    double mean = 0;
    for (double t : *data.targets) mean += t;
    mean /= m;
    double var = 0;
    for (double t : *data.targets) var += (t - mean) * (t - mean);
    var /= m;
    const double sd = var > 0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < data.rows; ++i)
      (*out.targets)[i] = ((*data.targets)[i] - mean) / sd;
  }
  return out;
}

Dataset apply_standardization(const Dataset& data,
                              const std::vector<double>& means,
                              const std::vector<double>& stds) {
  if (means.size() != data.cols || stds.size() != data.cols)
    throw ConfigError("standardization covers " +
                      std::to_string(means.size()) + " column(s) but the data has " +
                      std::to_string(data.cols) +
                      "; an unnamed target column is the usual cause");
  Dataset out = data;
  for (std::size_t j = 0; j < data.cols; ++j) {
    if (!(stds[j] > 0))
      throw ConfigError("standardization std must be positive");
    for (std::size_t i = 0; i < data.rows; ++i)
      out.at(i, j) = (data.at(i, j) - means[j]) / stds[j];
    out.featureMeans[j] = data.featureMeans[j] + means[j] * data.featureStds[j];
    out.featureStds[j] = data.featureStds[j] * stds[j];
  }
  return out;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t m,
                                                    const SplitSpec& spec) {
  if (spec.fractions.empty()) throw ConfigError("split needs at least one part");
  double sum = 0;
  for (double f : spec.fractions) {
    if (f <= 0) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("split fractions must sum to 1");

  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  RngStream rng = RngStream::derive(spec.seed, /*streamId=*/0x5714u);
  for (std::size_t i = m; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

  const std::size_t k = spec.fractions.size();
  std::vector<std::size_t> sizes(k);
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < k; ++p) {
    sizes[p] = static_cast<std::size_t>(
        std::floor(spec.fractions[p] * static_cast<double>(m)));
    assigned += sizes[p];
  }
  for (std::size_t p = 0; assigned < m; p = (p + 1) % k) {
    ++sizes[p];
    ++assigned;
  }

  std::vector<std::vector<std::size_t>> parts(k);
  std::size_t pos = 0;
  for (std::size_t p = 0; p < k; ++p) {
    parts[p].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + sizes[p]));
    pos += sizes[p];
  }
  return parts;
}

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& idx) {
  Dataset out = data;
  out.rows = idx.size();
  out.features.clear();
  out.features.reserve(idx.size() * data.cols);
  if (data.targets) out.targets->clear();
  for (std::size_t i : idx) {
    auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    if (data.targets) out.targets->push_back((*data.targets)[i]);
  }
  return out;
}

std::vector<Dataset> split(const Dataset& data, const SplitSpec& spec) {
  std::vector<Dataset> out;
  for (const auto& part : split_indices(data.rows, spec))
    out.push_back(take_rows(data, part));
  return out;
}

DistanceRange pairwise_distance_range(const Dataset& data,
                                      std::size_t maxPairs, std::uint64_t seed,
                                      Exec exec) {
  if (data.rows < 2)
    throw DataError("need at least two rows for pairwise distances");
  const std::size_t m = data.rows;
  const std::size_t total = m * (m - 1) / 2;

  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0;
    const double* pa = data.features.data() + a * data.cols;
    const double* pb = data.features.data() + b * data.cols;
    for (std::size_t j = 0; j < data.cols; ++j) {
      const double d = pa[j] - pb[j];
      s += d * d;
    }
    return std::sqrt(s);
  };

  DistanceRange r;
  if (total <= maxPairs) {
    // one task per first index; reduce in index order
    std::vector<double> mins(m - 1), maxs(m - 1);
    for_each_index(exec, m - 1, [&](std::size_t a) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (std::size_t b = a + 1; b < m; ++b) {
        const double d = dist(a, b);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      mins[a] = lo;
      maxs[a] = hi;
    });
    r.minDist = *std::min_element(mins.begin(), mins.end());
    r.maxDist = *std::max_element(maxs.begin(), maxs.end());
    r.exact = true;
  } else {
    std::vector<double> ds(maxPairs);
    for_each_index(exec, maxPairs, [&](std::size_t i) {
      RngStream rng = RngStream::derive(seed, 0x9a17'0000'0000ull + i);
      std::size_t a = rng.uniform_index(m);
      std::size_t b = rng.uniform_index(m - 1);
      if (b >= a) ++b;
      ds[i] = dist(a, b);
    });
    r.minDist = *std::min_element(ds.begin(), ds.end());
    r.maxDist = *std::max_element(ds.begin(), ds.end());
    r.exact = false;
  }
  return r;
}

std::vector<std::uint64_t> row_fingerprints(const Dataset& data) {
  std::vector<std::uint64_t> fp(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i) {
    std::uint64_t h = 0x243f6a8885a308d3ull;  // seed; any fixed odd-ish value
    for (std::size_t j = 0; j < data.cols; ++j) {
      std::uint64_t bits;
      const double v = data.at(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      h = hash_combine(h, bits);
    }
    fp[i] = h;
  }
  return fp;
}

}  // namespace localfid
