#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "driftgen/baselines.hpp"
#include "driftgen/data.hpp"
#include "driftgen/errors.hpp"
#include "driftgen/eval.hpp"
#include "driftgen/rng.hpp"
#include "driftgen/serialize.hpp"
#include "driftgen/trainer.hpp"

using namespace driftgen;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "driftgen_eval_test";
  std::filesystem::create_directories(dir);
  return dir;
}

// Single sigmoid unit on 2-D input, all three parameters generated.
NetSchema planar_schema() {
  NetSchema s;
  s.input_dim = 2;
  s.layers = {{1, Activation::kIdentity, true}};
  s.output_activation = OutputActivation::kSigmoid;
  s.generated_suffix_len = 1;
  return s;
}

DomainDataset two_cluster_data() {
  DomainDataset d;
  d.features = Tensor::zeros({4, 2});
  d.features.at2(0, 0) = -1.0;
  d.features.at2(0, 1) = -1.0;
  d.features.at2(1, 0) = -1.0;
  d.features.at2(1, 1) = 1.0;
  d.features.at2(2, 0) = 1.0;
  d.features.at2(2, 1) = -1.0;
  d.features.at2(3, 0) = 1.0;
  d.features.at2(3, 1) = 1.0;
  d.labels = Tensor::vec({0.0, 0.0, 1.0, 1.0});
  d.task = TaskKind::kClassification;
  return d;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && bits_equal(a.data, b.data);
}

bool states_equal(const GeneratorState& a, const GeneratorState& b) {
  auto ta = trainable_tensors(a);
  auto tb = trainable_tensors(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!tensors_equal(*ta[i], *tb[i])) return false;
  }
  if (!tensors_equal(a.z, b.z)) return false;
  if (a.memory.c.size() != b.memory.c.size()) return false;
  for (std::size_t i = 0; i < a.memory.c.size(); ++i) {
    if (!tensors_equal(a.memory.c[i], b.memory.c[i])) return false;
    if (!tensors_equal(a.memory.h[i], b.memory.h[i])) return false;
  }
  if (a.last_omega.has_value() != b.last_omega.has_value()) return false;
  if (a.last_omega && !bits_equal(a.last_omega->values, b.last_omega->values)) {
    return false;
  }
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    if (!bits_equal(a.history[i].values, b.history[i].values)) return false;
  }
  return a.step_index == b.step_index &&
         a.config.target_param_count == b.config.target_param_count;
}

TrainedModel tiny_trained_model() {
  NetSchema schema;
  schema.input_dim = 2;
  schema.layers = {{8, Activation::kRelu, true},
                   {1, Activation::kIdentity, true}};
  schema.output_activation = OutputActivation::kSigmoid;
  schema.generated_suffix_len = 2;
  GeneratorConfig gen;
  gen.latent_dim = 6;
  gen.lstm_depth = 2;
  gen.enc_hidden = 8;
  gen.dec_hidden = 8;
  gen.g0_hidden = 8;
  gen.lambda = 0.1;
  gen.tau = 2;
  gen.target_param_count = param_count(schema);
  TrainConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.iters_per_domain = 40;
  cfg.seed = 11;
  auto domains = make_rotated_moons(3, 40, 18.0, 0.1, 404);
  return train_sequence(schema, gen, cfg, domains);
}

}  // namespace

TEST_CASE("a perfect predictor scores zero error") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  // Weight vector (10, 0): sign of x0 decides the class with a wide margin.
  ParamVector omega = ParamVector::from_values(schema, {10.0, 0.0, 0.0});
  CHECK(evaluate(schema, {}, omega, data, TaskKind::kClassification) == 0.0);
}

TEST_CASE("a constant half output on balanced labels scores fifty") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector omega = ParamVector::zeros(schema);
  // Every output sits exactly at threshold and counts as class 1, so the
  // zero-labeled half of the rows is wrong.
  CHECK(evaluate(schema, {}, omega, data, TaskKind::kClassification) == 50.0);
}

TEST_CASE("a unit offset gives mean absolute error one") {
  NetSchema schema;
  schema.input_dim = 1;
  schema.layers = {{1, Activation::kIdentity, true}};
  schema.output_activation = OutputActivation::kIdentity;
  schema.generated_suffix_len = 1;
  DomainDataset data;
  data.features = Tensor::zeros({5, 1});
  data.labels = Tensor::vec({-2.0, -0.5, 0.0, 1.25, 3.0});
  for (std::size_t i = 0; i < 5; ++i) {
    data.features.at2(i, 0) = data.labels.data[i];
  }
  data.task = TaskKind::kRegression;
  ParamVector omega = ParamVector::from_values(schema, {1.0, 1.0});
  CHECK(evaluate(schema, {}, omega, data, TaskKind::kRegression) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("complement nets split one hundred percent between them") {
  NetSchema schema = planar_schema();
  Rng rng(99);
  DomainDataset data;
  data.features = Tensor::zeros({101, 2});
  data.labels = Tensor::zeros({101});
  for (std::size_t i = 0; i < 101; ++i) {
    data.features.at2(i, 0) = rng.normal();
    data.features.at2(i, 1) = rng.normal();
    data.labels.data[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  data.task = TaskKind::kClassification;
  ParamVector omega =
      ParamVector::from_values(schema, {rng.normal(), rng.normal(),
                                        rng.normal()});
  ParamVector negated = omega;
  for (double& v : negated.values) v = -v;  // sigmoid(-t) = 1 - sigmoid(t)
  double err = evaluate(schema, {}, omega, data, TaskKind::kClassification);
  double err_neg =
      evaluate(schema, {}, negated, data, TaskKind::kClassification);
  CHECK(err + err_neg == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("row order does not change the metric") {
  NetSchema schema = planar_schema();
  Rng rng(3);
  ParamVector omega =
      ParamVector::from_values(schema, {rng.normal(), rng.normal(),
                                        rng.normal()});
  DomainDataset data = make_rotated_moons(1, 50, 0.0, 0.1, 21)[0];
  DomainDataset reversed = data;
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i) {
    reversed.features.at2(i, 0) = data.features.at2(n - 1 - i, 0);
    reversed.features.at2(i, 1) = data.features.at2(n - 1 - i, 1);
    reversed.labels.data[i] = data.labels.data[n - 1 - i];
  }
  double a = evaluate(schema, {}, omega, data, TaskKind::kClassification);
  double b = evaluate(schema, {}, omega, reversed, TaskKind::kClassification);
  CHECK(a == b);
}

TEST_CASE("evaluate rejects inconsistent dimensions") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector bad;
  bad.values = {1.0, 2.0};
  CHECK_THROWS_AS(evaluate(schema, {}, bad, data, TaskKind::kClassification),
                  ShapeError);
  ParamVector omega = ParamVector::zeros(schema);
  std::vector<double> stray_prefix = {1.0};
  CHECK_THROWS_AS(
      evaluate(schema, stray_prefix, omega, data, TaskKind::kClassification),
      ShapeError);
  DomainDataset wide;
  wide.features = Tensor::zeros({2, 3});
  wide.labels = Tensor::vec({0.0, 1.0});
  wide.task = TaskKind::kClassification;
  CHECK_THROWS_AS(evaluate(schema, {}, omega, wide, TaskKind::kClassification),
                  ShapeError);
}

TEST_CASE("the raster header declares the grid and color depth") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector omega = ParamVector::zeros(schema);
  auto path = (scratch_dir() / "header.ppm").string();
  render_boundary(schema, {}, omega, data, RenderSpec{}, path);

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string content(std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>{});
  const std::string header = "P6\n200 200\n255\n";
  REQUIRE(content.size() == header.size() + 200 * 200 * 3);
  CHECK(content.compare(0, header.size(), header) == 0);
}

TEST_CASE("zero parameters paint a uniform mid-gray field") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector omega = ParamVector::zeros(schema);
  RenderSpec spec;
  spec.grid_resolution = 32;
  spec.draw_points = false;
  BoundaryImage image = render_boundary_image(schema, {}, omega, data, spec);
  bool uniform = true;
  for (std::uint8_t v : image.rgb) uniform = uniform && v == 128;
  CHECK(uniform);
}

TEST_CASE("data points overlay in two class colors") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector omega = ParamVector::zeros(schema);
  RenderSpec spec;
  spec.grid_resolution = 64;
  BoundaryImage image = render_boundary_image(schema, {}, omega, data, spec);
  auto [r0, c0] = image.pixel_at(-1.0, -1.0);  // a class-0 point
  auto [r1, c1] = image.pixel_at(1.0, 1.0);    // a class-1 point
  const std::uint8_t* p0 = image.at(r0, c0);
  const std::uint8_t* p1 = image.at(r1, c1);
  CHECK(p0[0] == 214);
  CHECK(p0[1] == 69);
  CHECK(p0[2] == 65);
  CHECK(p1[0] == 52);
  CHECK(p1[1] == 98);
  CHECK(p1[2] == 219);
}

TEST_CASE("a fully fit net keeps training points on their own side") {
  NetSchema schema;
  schema.input_dim = 2;
  schema.layers = {{50, Activation::kRelu, true},
                   {50, Activation::kRelu, true},
                   {1, Activation::kIdentity, true}};
  schema.output_activation = OutputActivation::kSigmoid;
  schema.generated_suffix_len = 3;
  DomainDataset data = make_rotated_moons(1, 120, 0.0, 0.1, 7)[0];
  BaselineConfig cfg;
  cfg.iters = 800;
  cfg.learning_rate = 5e-3;
  cfg.seed = 2;
  BaselineModel model =
      train_baseline(BaselineKind::kOffline, schema, {&data, 1}, cfg);
  REQUIRE(evaluate(schema, model.prefix.data, model.omega, data,
                   TaskKind::kClassification) == 0.0);

  RenderSpec spec;
  spec.draw_points = false;
  BoundaryImage image =
      render_boundary_image(schema, model.prefix.data, model.omega, data, spec);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [r, c] = image.pixel_at(data.features.at2(i, 0),
                                 data.features.at2(i, 1));
    bool bright = image.at(r, c)[0] >= 128;  // gray >= 128 reads as class 1
    if (bright == (data.labels.data[i] >= 0.5)) ++correct;
  }
  CHECK(correct == data.size());
}

TEST_CASE("rendering rejects non-planar features and bad paths") {
  NetSchema schema = planar_schema();
  DomainDataset data = two_cluster_data();
  ParamVector omega = ParamVector::zeros(schema);
  NetSchema wide = schema;
  wide.input_dim = 3;
  DomainDataset wide_data;
  wide_data.features = Tensor::zeros({2, 3});
  wide_data.labels = Tensor::vec({0.0, 1.0});
  wide_data.task = TaskKind::kClassification;
  ParamVector wide_omega = ParamVector::zeros(wide);
  CHECK_THROWS_AS(
      render_boundary_image(wide, {}, wide_omega, wide_data, RenderSpec{}),
      ShapeError);
  CHECK_THROWS_AS(render_boundary(schema, {}, omega, data, RenderSpec{},
                                  "/no/such/dir/out.ppm"),
                  IoError);
  RenderSpec bad;
  bad.grid_resolution = 0;
  CHECK_THROWS_AS(render_boundary_image(schema, {}, omega, data, bad),
                  ConfigError);
}

TEST_CASE("parameter vectors roundtrip bit exactly") {
  NetSchema schema = planar_schema();
  Rng rng(17);
  ParamVector omega = ParamVector::zeros(schema);
  omega.values = {rng.normal() * 1e100, -0.0, 5e-324};
  auto path = (scratch_dir() / "roundtrip.pvec").string();
  save_param_vector(omega, path);
  ParamVector back = load_param_vector(path);
  CHECK(back.owner_schema_hash == omega.owner_schema_hash);
  CHECK(bits_equal(back.values, omega.values));
}

TEST_CASE("foreign bytes are refused with the file named") {
  auto path = (scratch_dir() / "junk.pvec").string();
  std::ofstream(path, std::ios::binary) << "JUNKJUNKJUNKJUNKJUNK";
  CHECK_THROWS_WITH_AS(load_param_vector(path),
                       doctest::Contains(path.c_str()), IoError);
  CHECK_THROWS_WITH_AS(load_param_vector(path),
                       doctest::Contains("parameter vector"), IoError);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  CHECK_THROWS_AS(load_generator_state(path), IoError);
}

TEST_CASE("truncated and padded payloads are refused") {
  NetSchema schema = planar_schema();
  ParamVector omega = ParamVector::from_values(schema, {1.0, 2.0, 3.0});
  auto good = (scratch_dir() / "good.pvec").string();
  save_param_vector(omega, good);
  std::ifstream in(good, std::ios::binary);
  std::string bytes(std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>{});

  auto cut = (scratch_dir() / "cut.pvec").string();
  std::ofstream(cut, std::ios::binary)
      << bytes.substr(0, bytes.size() - 5);
  CHECK_THROWS_WITH_AS(load_param_vector(cut), doctest::Contains("truncated"),
                       IoError);

  auto padded = (scratch_dir() / "padded.pvec").string();
  std::ofstream(padded, std::ios::binary) << bytes << "x";
  CHECK_THROWS_WITH_AS(load_param_vector(padded),
                       doctest::Contains("trailing"), IoError);

  CHECK_THROWS_AS(load_param_vector((scratch_dir() / "absent.pvec").string()),
                  IoError);
}

TEST_CASE("generator state roundtrips bit exactly") {
  TrainedModel model = tiny_trained_model();
  REQUIRE(model.state.history.size() == 2);
  REQUIRE(model.state.last_omega.has_value());
  auto path = (scratch_dir() / "state.bin").string();
  save_generator_state(model.state, path);
  GeneratorState back = load_generator_state(path);
  CHECK(states_equal(back, model.state));
}

TEST_CASE("checkpoints reproduce the future prediction bitwise") {
  TrainedModel model = tiny_trained_model();
  auto path = (scratch_dir() / "model.ckpt").string();
  save_checkpoint(model, path);
  TrainedModel back = load_checkpoint(path);

  CHECK(states_equal(back.state, model.state));
  CHECK(tensors_equal(back.prefix, model.prefix));
  REQUIRE(back.omega_sequence.size() == model.omega_sequence.size());
  for (std::size_t i = 0; i < back.omega_sequence.size(); ++i) {
    CHECK(bits_equal(back.omega_sequence[i].values,
                     model.omega_sequence[i].values));
  }
  REQUIRE(back.loss_curves.size() == model.loss_curves.size());
  for (std::size_t i = 0; i < back.loss_curves.size(); ++i) {
    CHECK(bits_equal(back.loss_curves[i], model.loss_curves[i]));
  }
  CHECK(back.train.learning_rate == model.train.learning_rate);
  CHECK(back.train.seed == model.train.seed);
  CHECK(back.generator.tau == model.generator.tau);

  ParamVector future = predict_future(model);
  ParamVector future_back = predict_future(back);
  CHECK(bits_equal(future.values, future_back.values));

  // Saving the reloaded model again produces the same bytes.
  auto path2 = (scratch_dir() / "model2.ckpt").string();
  save_checkpoint(back, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string ba(std::istreambuf_iterator<char>(a),
                 std::istreambuf_iterator<char>{});
  std::string bb(std::istreambuf_iterator<char>(b),
                 std::istreambuf_iterator<char>{});
  CHECK(ba == bb);
}
