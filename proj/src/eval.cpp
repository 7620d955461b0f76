#include "driftgen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "driftgen/errors.hpp"

namespace driftgen {

namespace {

constexpr double kBoundaryPadding = 0.1;

const std::uint8_t kClass0Color[3] = {214, 69, 65};   // red
const std::uint8_t kClass1Color[3] = {52, 98, 219};   // blue

void check_dims(const NetSchema& schema, std::span<const double> prefix,
                const ParamVector& omega, const DomainDataset& data) {
  data.validate();
  if (omega.values.size() != param_count(schema)) {
    throw ShapeError("omega has " + std::to_string(omega.values.size()) +
                     " values, schema generates " +
                     std::to_string(param_count(schema)));
  }
  if (prefix.size() != prefix_param_count(schema)) {
    throw ShapeError("prefix has " + std::to_string(prefix.size()) +
                     " values, schema expects " +
                     std::to_string(prefix_param_count(schema)));
  }
  if (data.feature_dim() != schema.input_dim) {
    throw ShapeError("dataset feature dim " +
                     std::to_string(data.feature_dim()) +
                     " does not match net input dim " +
                     std::to_string(schema.input_dim));
  }
}

// Padded world interval; degenerate data still gets a nonzero window.
void padded_range(double lo, double hi, double& out_lo, double& out_hi) {
  double pad = kBoundaryPadding * (hi - lo);
  if (pad == 0.0) pad = 0.5;
  out_lo = lo - pad;
  out_hi = hi + pad;
}

}  // namespace

double evaluate(const NetSchema& schema, std::span<const double> prefix,
                const ParamVector& omega, const DomainDataset& data,
                TaskKind task) {
  check_dims(schema, prefix, omega, data);
  Tensor pred = forward_eval(schema, omega.values, prefix, data.features);
  const std::size_t n = data.size();
  double sum = 0.0;
  if (task == TaskKind::kClassification) {
    for (std::size_t i = 0; i < n; ++i) {
      int cls = pred.data[i] >= 0.5 ? 1 : 0;  // ties count as class 1
      int label = data.labels.data[i] >= 0.5 ? 1 : 0;
      if (cls != label) sum += 1.0;
    }
    return 100.0 * sum / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    sum += std::abs(pred.data[i] - data.labels.data[i]);
  }
  return sum / static_cast<double>(n);
}

void RenderSpec::validate() const {
  if (grid_resolution < 1) {
    throw ConfigError("grid_resolution must be at least 1, got " +
                      std::to_string(grid_resolution));
  }
}

const std::uint8_t* BoundaryImage::at(int row, int col) const {
  return rgb.data() + 3 * (static_cast<std::size_t>(row) * width + col);
}

std::pair<int, int> BoundaryImage::pixel_at(double x, double y) const {
  auto clamp_to = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  int col = static_cast<int>(
      std::floor((x - x0) / (x1 - x0) * static_cast<double>(width)));
  int row = static_cast<int>(
      std::floor((y1 - y) / (y1 - y0) * static_cast<double>(height)));
  return {clamp_to(row, height), clamp_to(col, width)};
}

BoundaryImage render_boundary_image(const NetSchema& schema,
                                    std::span<const double> prefix,
                                    const ParamVector& omega,
                                    const DomainDataset& data,
                                    const RenderSpec& spec) {
  spec.validate();
  check_dims(schema, prefix, omega, data);
  if (data.feature_dim() != 2) {
    throw ShapeError("boundary rendering needs 2-D features, got dim " +
                     std::to_string(data.feature_dim()));
  }

  const std::size_t n = data.size();
  double xmin = data.features.at2(0, 0), xmax = xmin;
  double ymin = data.features.at2(0, 1), ymax = ymin;
  for (std::size_t i = 1; i < n; ++i) {
    xmin = std::min(xmin, data.features.at2(i, 0));
    xmax = std::max(xmax, data.features.at2(i, 0));
    ymin = std::min(ymin, data.features.at2(i, 1));
    ymax = std::max(ymax, data.features.at2(i, 1));
  }

  BoundaryImage image;
  image.width = spec.grid_resolution;
  image.height = spec.grid_resolution;
  padded_range(xmin, xmax, image.x0, image.x1);
  padded_range(ymin, ymax, image.y0, image.y1);

  const int w = image.width, h = image.height;
  Tensor grid = Tensor::zeros({static_cast<std::size_t>(w) * h, 2});
  for (int r = 0; r < h; ++r) {
    double y = image.y1 - (r + 0.5) * (image.y1 - image.y0) / h;
    for (int c = 0; c < w; ++c) {
      double x = image.x0 + (c + 0.5) * (image.x1 - image.x0) / w;
      grid.at2(static_cast<std::size_t>(r) * w + c, 0) = x;
      grid.at2(static_cast<std::size_t>(r) * w + c, 1) = y;
    }
  }
  Tensor pred = forward_eval(schema, omega.values, prefix, grid);

  image.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
    double p = std::clamp(pred.data[i], 0.0, 1.0);
    auto g = static_cast<std::uint8_t>(std::lround(p * 255.0));
    image.rgb[3 * i] = g;
    image.rgb[3 * i + 1] = g;
    image.rgb[3 * i + 2] = g;
  }

  if (spec.draw_points) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* color =
          data.labels.data[i] >= 0.5 ? kClass1Color : kClass0Color;
      auto [pr, pc] = image.pixel_at(data.features.at2(i, 0),
                                     data.features.at2(i, 1));
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          int r = pr + dr, c = pc + dc;
          if (r < 0 || r >= h || c < 0 || c >= w) continue;
          std::uint8_t* px = image.rgb.data() +
                             3 * (static_cast<std::size_t>(r) * w + c);
          px[0] = color[0];
          px[1] = color[1];
          px[2] = color[2];
        }
      }
    }
  }
  return image;
}

void write_ppm(const BoundaryImage& image, const std::string& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + out_path + " for writing");
  }
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) {
    throw IoError("write failed for " + out_path);
  }
}

void render_boundary(const NetSchema& schema, std::span<const double> prefix,
                     const ParamVector& omega, const DomainDataset& data,
                     const RenderSpec& spec, const std::string& out_path) {
  write_ppm(render_boundary_image(schema, prefix, omega, data, spec),
            out_path);
}

}  // namespace driftgen
