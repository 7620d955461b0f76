#include "driftgen/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "driftgen/errors.hpp"
#include "driftgen/rng.hpp"

namespace driftgen {

void DomainDataset::validate() const {
  if (features.shape.size() != 2) {
    throw ShapeError("dataset: features must be rank 2, got " +
                     features.shape_str());
  }
  const std::size_t n = features.shape[0];
  if (n == 0) throw ShapeError("dataset: domain is empty");
  if (labels.shape != std::vector<std::size_t>{n}) {
    throw ShapeError("dataset: labels shape " + labels.shape_str() +
                     " does not match " + std::to_string(n) + " rows");
  }
  if (!features.all_finite() || !labels.all_finite()) {
    throw NumericError("dataset: non-finite value in domain " +
                       std::to_string(domain_index));
  }
  if (task == TaskKind::kClassification) {
    for (double v : labels.data) {
      if (v != 0.0 && v != 1.0) {
        throw ShapeError("dataset: classification label " +
                         std::to_string(v) + " is not 0 or 1");
      }
    }
  }
}

Tensor rotate_points(const Tensor& xy, double degrees) {
  if (xy.shape.size() != 2 || xy.shape[1] != 2) {
    throw ShapeError("rotate_points: expected n x 2, got " + xy.shape_str());
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  Tensor out = xy;
  for (std::size_t r = 0; r < xy.shape[0]; ++r) {
    const double x = xy.data[2 * r];
    const double y = xy.data[2 * r + 1];
    out.data[2 * r] = c * x - s * y;
    out.data[2 * r + 1] = s * x + c * y;
  }
  return out;
}

std::vector<DomainDataset> make_rotated_moons(std::size_t num_domains,
                                              std::size_t n_per_domain,
                                              double step_degrees,
                                              double noise_sigma,
                                              std::uint64_t seed) {
  if (num_domains == 0 || n_per_domain < 2) {
    throw ConfigError("moons: need at least one domain and two points");
  }
  if (noise_sigma < 0.0) throw ConfigError("moons: noise_sigma must be >= 0");
  Rng rng(seed);
  std::vector<DomainDataset> out;
  out.reserve(num_domains);
  const std::size_t n_lower = n_per_domain / 2;
  for (std::size_t s = 0; s < num_domains; ++s) {
    Tensor pts = Tensor::zeros({n_per_domain, 2});
    Tensor labels = Tensor::zeros({n_per_domain});
    for (std::size_t i = 0; i < n_per_domain; ++i) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      double x, y;
      if (i < n_lower) {
        x = 1.0 - std::cos(t);
        y = 0.5 - std::sin(t);
        labels.data[i] = 0.0;
      } else {
        x = std::cos(t);
        y = std::sin(t);
        labels.data[i] = 1.0;
      }
      // Center the crescent pair on the origin so rotation keeps the two
      // classes entangled instead of orbiting them.
      pts.data[2 * i] = x - 0.5 + rng.normal(0.0, noise_sigma);
      pts.data[2 * i + 1] = y - 0.25 + rng.normal(0.0, noise_sigma);
    }
    DomainDataset ds;
    ds.features =
        rotate_points(pts, static_cast<double>(s) * step_degrees);
    ds.labels = std::move(labels);
    ds.domain_index = s;
    ds.task = TaskKind::kClassification;
    ds.validate();
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<DomainDataset> make_drifting_regression(std::size_t num_domains,
                                                    std::size_t n_per_domain,
                                                    double drift_rate,
                                                    double noise_sigma,
                                                    std::uint64_t seed) {
  if (num_domains == 0 || n_per_domain == 0) {
    throw ConfigError("regression: need at least one domain and one point");
  }
  if (noise_sigma < 0.0) {
    throw ConfigError("regression: noise_sigma must be >= 0");
  }
  Rng rng(seed);
  std::vector<DomainDataset> out;
  out.reserve(num_domains);
  for (std::size_t s = 0; s < num_domains; ++s) {
    const double w = regression_weight(s, drift_rate);
    DomainDataset ds;
    ds.features = Tensor::zeros({n_per_domain, 1});
    ds.labels = Tensor::zeros({n_per_domain});
    for (std::size_t i = 0; i < n_per_domain; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      ds.features.data[i] = x;
      ds.labels.data[i] = w * x + rng.normal(0.0, noise_sigma);
    }
    ds.domain_index = s;
    ds.task = TaskKind::kRegression;
    ds.validate();
    out.push_back(std::move(ds));
  }
  return out;
}

void CsvLoadSpec::validate() const {
  if (path.empty()) throw ConfigError("csv: path is empty");
  if (feature_columns.empty()) {
    throw ConfigError("csv: feature_columns is empty");
  }
  if (label_column.empty()) throw ConfigError("csv: label_column is empty");
  const bool by_domain = !domain_column.empty();
  const bool by_time = !time_column.empty();
  if (by_domain == by_time) {
    throw ConfigError(
        "csv: exactly one of domain_column or time_column must be set");
  }
  if (by_time) {
    if (boundaries.empty()) {
      throw ConfigError("csv: time_column requires boundaries");
    }
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
      if (!(boundaries[i - 1] < boundaries[i])) {
        throw ConfigError("csv: boundaries must be strictly ascending");
      }
    }
  }
  if (normalize && stat_domains.empty()) {
    throw ConfigError("csv: normalize requires stat_domains");
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& column,
                  std::size_t row) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size()) {
    throw ConfigError("csv: non-numeric value '" + cell + "' in column '" +
                      column + "' at data row " + std::to_string(row));
  }
  return v;
}

}  // namespace

std::vector<DomainDataset> load_csv(const CsvLoadSpec& spec) {
  spec.validate();
  std::ifstream in(spec.path);
  if (!in) throw IoError("csv: cannot open file '" + spec.path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("csv: file '" + spec.path + "' has no header");
  }
  const std::vector<std::string> header = split_csv_line(line);
  auto column_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("csv: column '" + name + "' not found in '" + spec.path +
                      "'");
  };
  std::vector<std::size_t> feat_idx;
  for (const std::string& name : spec.feature_columns) {
    feat_idx.push_back(column_of(name));
  }
  const std::size_t label_idx = column_of(spec.label_column);
  const bool by_domain = !spec.domain_column.empty();
  const std::size_t group_idx =
      column_of(by_domain ? spec.domain_column : spec.time_column);

  struct Row {
    std::vector<double> features;
    double label;
  };
  // Keyed by raw domain value (by_domain) or bin index (by_time); map keys
  // come back in ascending order, which fixes the domain numbering.
  std::map<long long, std::vector<Row>> groups;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError("csv: data row " + std::to_string(row_no) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    }
    Row row;
    row.features.reserve(feat_idx.size());
    for (std::size_t k = 0; k < feat_idx.size(); ++k) {
      row.features.push_back(
          parse_cell(cells[feat_idx[k]], spec.feature_columns[k], row_no));
    }
    row.label = parse_cell(cells[label_idx], spec.label_column, row_no);
    long long key;
    if (by_domain) {
      const double v = parse_cell(cells[group_idx], spec.domain_column, row_no);
      if (v != std::floor(v) || v < 0) {
        throw ConfigError("csv: domain value " + std::to_string(v) +
                          " at data row " + std::to_string(row_no) +
                          " is not a non-negative integer");
      }
      key = static_cast<long long>(v);
    } else {
      const double t = parse_cell(cells[group_idx], spec.time_column, row_no);
      std::size_t bin = 0;
      while (bin < spec.boundaries.size() && t >= spec.boundaries[bin]) ++bin;
      key = static_cast<long long>(bin);
    }
    groups[key].push_back(std::move(row));
  }
  if (groups.empty()) {
    throw ConfigError("csv: file '" + spec.path + "' has no data rows");
  }

  std::vector<DomainDataset> out;
  const std::size_t d = feat_idx.size();
  std::size_t index = 0;
  for (auto& [key, rows] : groups) {
    DomainDataset ds;
    ds.features = Tensor::zeros({rows.size(), d});
    ds.labels = Tensor::zeros({rows.size()});
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t k = 0; k < d; ++k) {
        ds.features.data[r * d + k] = rows[r].features[k];
      }
      ds.labels.data[r] = rows[r].label;
    }
    ds.domain_index = index++;
    ds.task = spec.task;
    ds.validate();
    out.push_back(std::move(ds));
  }

  if (spec.normalize) {
    for (std::size_t dom : spec.stat_domains) {
      if (dom >= out.size()) {
        throw ConfigError("csv: stat domain " + std::to_string(dom) +
                          " out of range, file yields " +
                          std::to_string(out.size()) + " domains");
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      double sum = 0.0, sq = 0.0;
      std::size_t n = 0;
      for (std::size_t dom : spec.stat_domains) {
        for (std::size_t r = 0; r < out[dom].size(); ++r) {
          const double v = out[dom].features.data[r * d + k];
          sum += v;
          sq += v * v;
          ++n;
        }
      }
      const double mean = sum / static_cast<double>(n);
      const double var = sq / static_cast<double>(n) - mean * mean;
      const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
      for (DomainDataset& ds : out) {
        for (std::size_t r = 0; r < ds.size(); ++r) {
          ds.features.data[r * d + k] =
              (ds.features.data[r * d + k] - mean) / sd;
        }
      }
    }
  }
  return out;
}

void write_csv(const std::string& path, const DomainDataset& ds) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw IoError("csv: cannot write file '" + path + "'");
  const std::size_t d = ds.feature_dim();
  for (std::size_t k = 0; k < d; ++k) out << "x" << k << ",";
  out << "label,domain\n";
  char buf[64];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features.data[r * d + k]);
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.labels.data[r]);
    out << buf << "," << ds.domain_index << "\n";
  }
  if (!out) throw IoError("csv: write failed for '" + path + "'");
}

TaskKind DatasetSpec::task() const {
  switch (source) {
    case Source::kMoons: return TaskKind::kClassification;
    case Source::kRegression: return TaskKind::kRegression;
    case Source::kCsv: return csv.task;
  }
  throw ConfigError("dataset: unknown source");
}

namespace {

// The csv sub-spec inherits its normalization domains from the experiment's
// train split when they were not set explicitly.
CsvLoadSpec effective_csv(const DatasetSpec& spec) {
  CsvLoadSpec cs = spec.csv;
  if (cs.normalize && cs.stat_domains.empty()) {
    cs.stat_domains = spec.train_domains;
  }
  return cs;
}

}  // namespace

void DatasetSpec::validate() const {
  if (train_domains.empty()) {
    throw ConfigError("dataset: train_domains is empty");
  }
  for (std::size_t i = 1; i < train_domains.size(); ++i) {
    if (!(train_domains[i - 1] < train_domains[i])) {
      throw ConfigError("dataset: train_domains must be strictly ascending");
    }
  }
  for (std::size_t dom : train_domains) {
    if (dom == test_domain) {
      throw ConfigError("dataset: test_domain " + std::to_string(test_domain) +
                        " also appears in train_domains");
    }
  }
  if (source == Source::kCsv) {
    effective_csv(*this).validate();
    return;
  }
  if (num_domains == 0) throw ConfigError("dataset: num_domains must be >= 1");
  const std::size_t limit = num_domains;
  if (test_domain >= limit) {
    throw ConfigError("dataset: test_domain " + std::to_string(test_domain) +
                      " out of range for " + std::to_string(limit) +
                      " domains");
  }
  if (train_domains.back() >= limit) {
    throw ConfigError("dataset: train domain " +
                      std::to_string(train_domains.back()) +
                      " out of range for " + std::to_string(limit) +
                      " domains");
  }
}

std::vector<DomainDataset> materialize(const DatasetSpec& spec,
                                       std::uint64_t seed) {
  spec.validate();
  std::vector<DomainDataset> all;
  switch (spec.source) {
    case DatasetSpec::Source::kMoons:
      all = make_rotated_moons(spec.num_domains, spec.n_per_domain,
                               spec.step_degrees, spec.noise_sigma, seed);
      break;
    case DatasetSpec::Source::kRegression:
      all = make_drifting_regression(spec.num_domains, spec.n_per_domain,
                                     spec.drift_rate, spec.noise_sigma, seed);
      break;
    case DatasetSpec::Source::kCsv:
      all = load_csv(effective_csv(spec));
      break;
  }
  const std::size_t limit = all.size();
  if (spec.test_domain >= limit || spec.train_domains.back() >= limit) {
    throw ConfigError("dataset: domain index out of range, stream has " +
                      std::to_string(limit) + " domains");
  }
  return all;
}

}  // namespace driftgen
