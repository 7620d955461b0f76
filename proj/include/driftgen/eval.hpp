#ifndef DRIFTGEN_EVAL_HPP_
#define DRIFTGEN_EVAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftgen/data.hpp"
#include "driftgen/net.hpp"

namespace driftgen {

// Classification: percentage of rows whose thresholded output disagrees with
// the label. Outputs exactly at 0.5 count as class 1. Regression: mean
// absolute error. Permutation-invariant over rows.
double evaluate(const NetSchema& schema, std::span<const double> prefix,
                const ParamVector& omega, const DomainDataset& data,
                TaskKind task);

struct RenderSpec {
  int grid_resolution = 200;
  bool draw_points = true;

  void validate() const;
};

// Raster of the net output over a padded window around the data, row 0 at
// the top. Kept in memory so tests can probe pixels without re-parsing PPM.
struct BoundaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
  double x0 = 0.0, x1 = 0.0;      // world window after padding
  double y0 = 0.0, y1 = 0.0;

  const std::uint8_t* at(int row, int col) const;
  // Pixel whose cell contains the world point, clamped to the image.
  std::pair<int, int> pixel_at(double x, double y) const;
};

// Grid of sigmoid-scale outputs over the data bounding box padded 10% per
// side, mapped to gray as round(p * 255), with data points drawn as 3x3
// squares in two class colors when requested. Features must be 2-D.
BoundaryImage render_boundary_image(const NetSchema& schema,
                                    std::span<const double> prefix,
                                    const ParamVector& omega,
                                    const DomainDataset& data,
                                    const RenderSpec& spec);

// Binary PPM (P6), 8-bit RGB.
void write_ppm(const BoundaryImage& image, const std::string& out_path);

void render_boundary(const NetSchema& schema, std::span<const double> prefix,
                     const ParamVector& omega, const DomainDataset& data,
                     const RenderSpec& spec, const std::string& out_path);

}  // namespace driftgen

#endif  // DRIFTGEN_EVAL_HPP_
