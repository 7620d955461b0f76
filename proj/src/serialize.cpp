#include "driftgen/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "driftgen/errors.hpp"

namespace driftgen {

namespace {

constexpr char kParamMagic[4] = {'D', 'G', 'P', 'V'};
constexpr char kStateMagic[4] = {'D', 'G', 'G', 'S'};
constexpr char kCheckpointMagic[4] = {'D', 'G', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

struct Writer {
  std::string buf;

  void magic(const char (&m)[4]) { buf.append(m, 4); }
  void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void tensor(const Tensor& t) {
    u64(t.shape.size());
    for (std::size_t d : t.shape) u64(d);
    for (double v : t.data) f64(v);
  }
  void param_vector(const ParamVector& p) {
    u32(p.owner_schema_hash);
    u64(p.values.size());
    for (double v : p.values) f64(v);
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }

  void dump(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + path);
  }
};

struct Reader {
  std::string buf;
  std::size_t pos = 0;
  std::string path;

  explicit Reader(const std::string& file_path) : path(file_path) {
    std::ifstream in(file_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + file_path);
    buf.assign(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
  }

  void need(std::size_t n) const {
    if (buf.size() - pos < n) throw IoError("truncated file " + path);
  }
  void expect_magic(const char (&m)[4], const char* kind) {
    need(4);
    if (buf.compare(pos, 4, m, 4) != 0) {
      throw IoError(path + " is not a " + kind + " file");
    }
    pos += 4;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  // Count check happens before allocation so a corrupt length fails cleanly.
  std::size_t count() {
    std::uint64_t n = u64();
    need(n > buf.size() ? buf.size() + 1 : 0);
    return static_cast<std::size_t>(n);
  }

  Tensor tensor() {
    std::size_t ndim = count();
    std::vector<std::size_t> shape(ndim);
    std::size_t total = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      shape[i] = count();
      total *= shape[i];
    }
    need(total * 8);
    Tensor t;
    t.shape = std::move(shape);
    t.data.resize(total);
    for (double& v : t.data) v = f64();
    return t;
  }
  ParamVector param_vector() {
    ParamVector p;
    p.owner_schema_hash = u32();
    std::size_t n = count();
    need(n * 8);
    p.values.resize(n);
    for (double& v : p.values) v = f64();
    return p;
  }
  std::vector<double> doubles() {
    std::size_t n = count();
    need(n * 8);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  void done() const {
    if (pos != buf.size()) throw IoError("trailing bytes in " + path);
  }
};

void write_mlp2(Writer& w, const Mlp2& m) {
  w.tensor(m.w1);
  w.tensor(m.b1);
  w.tensor(m.w2);
  w.tensor(m.b2);
}

Mlp2 read_mlp2(Reader& r) {
  Mlp2 m;
  m.w1 = r.tensor();
  m.b1 = r.tensor();
  m.w2 = r.tensor();
  m.b2 = r.tensor();
  return m;
}

void write_generator_config(Writer& w, const GeneratorConfig& c) {
  w.u64(c.latent_dim);
  w.u64(c.lstm_depth);
  w.u64(c.enc_hidden);
  w.u64(c.dec_hidden);
  w.u64(c.g0_hidden);
  w.f64(c.lambda);
  w.u64(c.tau);
  w.u64(c.target_param_count);
}

GeneratorConfig read_generator_config(Reader& r) {
  GeneratorConfig c;
  c.latent_dim = r.count();
  c.lstm_depth = r.count();
  c.enc_hidden = r.count();
  c.dec_hidden = r.count();
  c.g0_hidden = r.count();
  c.lambda = r.f64();
  c.tau = r.count();
  c.target_param_count = r.count();
  return c;
}

void write_state_body(Writer& w, const GeneratorState& s) {
  write_generator_config(w, s.config);
  w.tensor(s.z);
  write_mlp2(w, s.g0);
  write_mlp2(w, s.encoder);
  w.u64(s.cells.size());
  for (const LstmLayerParams& cell : s.cells) {
    w.tensor(cell.wx);
    w.tensor(cell.wh);
    w.tensor(cell.b);
  }
  write_mlp2(w, s.decoder);
  w.u64(s.memory.c.size());
  for (const Tensor& t : s.memory.c) w.tensor(t);
  for (const Tensor& t : s.memory.h) w.tensor(t);
  w.u8(s.last_omega.has_value() ? 1 : 0);
  if (s.last_omega) w.param_vector(*s.last_omega);
  w.u64(s.history.size());
  for (const ParamVector& p : s.history) w.param_vector(p);
  w.u64(s.step_index);
}

GeneratorState read_state_body(Reader& r) {
  GeneratorState s;
  s.config = read_generator_config(r);
  s.z = r.tensor();
  s.g0 = read_mlp2(r);
  s.encoder = read_mlp2(r);
  std::size_t depth = r.count();
  s.cells.resize(depth);
  for (LstmLayerParams& cell : s.cells) {
    cell.wx = r.tensor();
    cell.wh = r.tensor();
    cell.b = r.tensor();
  }
  s.decoder = read_mlp2(r);
  std::size_t layers = r.count();
  s.memory.c.resize(layers);
  s.memory.h.resize(layers);
  for (Tensor& t : s.memory.c) t = r.tensor();
  for (Tensor& t : s.memory.h) t = r.tensor();
  if (r.u8() != 0) s.last_omega = r.param_vector();
  std::size_t hist = r.count();
  s.history.clear();
  for (std::size_t i = 0; i < hist; ++i) s.history.push_back(r.param_vector());
  s.step_index = r.count();
  return s;
}

void write_schema(Writer& w, const NetSchema& schema) {
  w.u64(schema.input_dim);
  w.u8(static_cast<std::uint8_t>(schema.output_activation));
  w.u64(schema.generated_suffix_len);
  w.u64(schema.layers.size());
  for (const LayerSpec& layer : schema.layers) {
    w.u64(layer.width);
    w.u8(static_cast<std::uint8_t>(layer.activation));
    w.u8(layer.has_bias ? 1 : 0);
  }
}

NetSchema read_schema(Reader& r) {
  NetSchema schema;
  schema.input_dim = r.count();
  schema.output_activation = static_cast<OutputActivation>(r.u8());
  schema.generated_suffix_len = r.count();
  std::size_t layers = r.count();
  schema.layers.resize(layers);
  for (LayerSpec& layer : schema.layers) {
    layer.width = r.count();
    layer.activation = static_cast<Activation>(r.u8());
    layer.has_bias = r.u8() != 0;
  }
  return schema;
}

void check_version(std::uint32_t version, const std::string& path) {
  if (version != kFormatVersion) {
    throw IoError("unsupported format version " + std::to_string(version) +
                  " in " + path);
  }
}

}  // namespace

void save_param_vector(const ParamVector& omega, const std::string& path) {
  Writer w;
  w.magic(kParamMagic);
  w.u32(omega.owner_schema_hash);
  w.u64(omega.values.size());
  for (double v : omega.values) w.f64(v);
  w.dump(path);
}

ParamVector load_param_vector(const std::string& path) {
  Reader r(path);
  r.expect_magic(kParamMagic, "parameter vector");
  ParamVector p;
  p.owner_schema_hash = r.u32();
  std::size_t n = r.count();
  r.need(n * 8);
  p.values.resize(n);
  for (double& v : p.values) v = r.f64();
  r.done();
  return p;
}

void save_generator_state(const GeneratorState& state,
                          const std::string& path) {
  Writer w;
  w.magic(kStateMagic);
  w.u32(kFormatVersion);
  write_state_body(w, state);
  w.dump(path);
}

GeneratorState load_generator_state(const std::string& path) {
  Reader r(path);
  r.expect_magic(kStateMagic, "generator state");
  check_version(r.u32(), path);
  GeneratorState s = read_state_body(r);
  r.done();
  return s;
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  Writer w;
  w.magic(kCheckpointMagic);
  w.u32(kFormatVersion);
  write_schema(w, model.schema);
  w.f64(model.train.learning_rate);
  w.u64(model.train.iters_per_domain);
  w.u64(model.train.seed);
  w.f64(model.train.beta1);
  w.f64(model.train.beta2);
  w.f64(model.train.epsilon);
  write_state_body(w, model.state);
  w.tensor(model.prefix);
  w.u64(model.omega_sequence.size());
  for (const ParamVector& p : model.omega_sequence) w.param_vector(p);
  w.u64(model.loss_curves.size());
  for (const std::vector<double>& curve : model.loss_curves) w.doubles(curve);
  w.dump(path);
}

TrainedModel load_checkpoint(const std::string& path) {
  Reader r(path);
  r.expect_magic(kCheckpointMagic, "checkpoint");
  check_version(r.u32(), path);
  TrainedModel model;
  model.schema = read_schema(r);
  model.train.learning_rate = r.f64();
  model.train.iters_per_domain = r.count();
  model.train.seed = r.u64();
  model.train.beta1 = r.f64();
  model.train.beta2 = r.f64();
  model.train.epsilon = r.f64();
  model.state = read_state_body(r);
  model.generator = model.state.config;
  model.prefix = r.tensor();
  std::size_t omegas = r.count();
  model.omega_sequence.resize(omegas);
  for (ParamVector& p : model.omega_sequence) p = r.param_vector();
  std::size_t curves = r.count();
  model.loss_curves.resize(curves);
  for (std::vector<double>& curve : model.loss_curves) curve = r.doubles();
  r.done();
  return model;
}

}  // namespace driftgen
