#ifndef DRIFTGEN_DATA_HPP_
#define DRIFTGEN_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "driftgen/tensor.hpp"

namespace driftgen {

enum class TaskKind : std::uint8_t { kClassification, kRegression };

// One time-indexed domain: features (n x d) plus aligned labels (n).
// Classification labels are 0/1; regression labels are any finite value.
struct DomainDataset {
  Tensor features;
  Tensor labels;
  std::size_t domain_index = 0;
  TaskKind task = TaskKind::kClassification;

  std::size_t size() const { return labels.data.size(); }
  std::size_t feature_dim() const {
    return features.shape.size() == 2 ? features.shape[1] : 0;
  }
  void validate() const;
};

// Counter-clockwise rotation of 2-D row points about the origin.
Tensor rotate_points(const Tensor& xy, double degrees);

// Crescent-pair stream: every domain draws a fresh sample of two interleaved
// crescents (centered on the origin), then rotates it by
// domain_index * step_degrees. Lower crescent is class 0, upper is class 1.
std::vector<DomainDataset> make_rotated_moons(std::size_t num_domains,
                                              std::size_t n_per_domain,
                                              double step_degrees,
                                              double noise_sigma,
                                              std::uint64_t seed);

// Scalar regression stream: x ~ U(-1, 1), y = w_s x + noise, with the slope
// drifting linearly in the domain index.
std::vector<DomainDataset> make_drifting_regression(std::size_t num_domains,
                                                    std::size_t n_per_domain,
                                                    double drift_rate,
                                                    double noise_sigma,
                                                    std::uint64_t seed);

inline constexpr double kRegressionBaseWeight = 1.0;
// E|x| for x ~ U(-1, 1); the closed-form one-step-behind error is
// drift_rate * this.
inline constexpr double kRegressionMeanAbsInput = 0.5;

inline double regression_weight(std::size_t domain_index, double drift_rate) {
  return kRegressionBaseWeight +
         static_cast<double>(domain_index) * drift_rate;
}

// Column-mapped CSV ingestion. Domains come either from an integer-valued
// domain_column, or from binning a numeric time_column against ascending
// boundaries (value < boundaries[0] -> domain 0, then one domain per
// interval, >= last boundary -> last domain).
struct CsvLoadSpec {
  std::string path;
  std::vector<std::string> feature_columns;
  std::string label_column;
  std::string domain_column;
  std::string time_column;
  std::vector<double> boundaries;
  bool normalize = false;
  // Domains whose rows define the normalization statistics; the transform
  // is then applied to every domain.
  std::vector<std::size_t> stat_domains;
  TaskKind task = TaskKind::kClassification;

  void validate() const;
};

std::vector<DomainDataset> load_csv(const CsvLoadSpec& spec);

// Writes one domain as x0..x{d-1},label with round-trippable formatting.
void write_csv(const std::string& path, const DomainDataset& ds);

// Source-independent description of a full experiment stream.
struct DatasetSpec {
  enum class Source : std::uint8_t { kMoons, kRegression, kCsv };
  Source source = Source::kMoons;
  std::size_t num_domains = 10;
  std::size_t n_per_domain = 200;
  double step_degrees = 18.0;
  double noise_sigma = 0.1;
  double drift_rate = 0.2;
  CsvLoadSpec csv;
  std::vector<std::size_t> train_domains;
  std::size_t test_domain = 9;

  TaskKind task() const;
  void validate() const;
};

// All domains of the stream, in index order. The seed drives synthetic
// sampling and is ignored for CSV sources.
std::vector<DomainDataset> materialize(const DatasetSpec& spec,
                                       std::uint64_t seed);

}  // namespace driftgen

#endif  // DRIFTGEN_DATA_HPP_
