#include "driftgen/generator.hpp"

#include <cmath>
#include <utility>

#include "driftgen/errors.hpp"
#include "driftgen/rng.hpp"

namespace driftgen {

void GeneratorConfig::validate() const {
  if (latent_dim == 0) throw ConfigError("generator: latent_dim must be >= 1");
  if (lstm_depth == 0) throw ConfigError("generator: lstm_depth must be >= 1");
  if (enc_hidden == 0 || dec_hidden == 0 || g0_hidden == 0) {
    throw ConfigError("generator: hidden widths must be >= 1");
  }
  if (target_param_count == 0) {
    throw ConfigError("generator: target_param_count must be >= 1");
  }
  if (!std::isfinite(lambda)) {
    throw ConfigError("generator: lambda must be finite");
  }
}

namespace {

Tensor uniform_tensor(Rng& rng, std::vector<std::size_t> shape, double bound) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Mlp2 init_mlp2(Rng& rng, std::size_t in, std::size_t hidden, std::size_t out) {
  Mlp2 m;
  const double b1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  m.w1 = uniform_tensor(rng, {in, hidden}, b1);
  m.b1 = uniform_tensor(rng, {hidden}, b1);
  m.w2 = uniform_tensor(rng, {hidden, out}, b2);
  m.b2 = uniform_tensor(rng, {out}, b2);
  return m;
}

// Forward through a two-layer perceptron on plain values.
std::vector<double> mlp2_value(const Mlp2& m, std::span<const double> x) {
  const std::size_t in = m.w1.shape[0];
  const std::size_t hidden = m.w1.shape[1];
  const std::size_t out = m.w2.shape[1];
  std::vector<double> h(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    double acc = m.b1.data[j];
    for (std::size_t i = 0; i < in; ++i) acc += x[i] * m.w1.data[i * hidden + j];
    h[j] = std::tanh(acc);
  }
  std::vector<double> y(out);
  for (std::size_t j = 0; j < out; ++j) {
    double acc = m.b2.data[j];
    for (std::size_t i = 0; i < hidden; ++i) acc += h[i] * m.w2.data[i * out + j];
    y[j] = acc;
  }
  return y;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void lstm_step_value(const LstmLayerParams& cell, std::span<const double> x,
                     const Tensor& c_in, const Tensor& h_in, Tensor& c_out,
                     Tensor& h_out) {
  const std::size_t in = cell.wx.shape[0];
  const std::size_t four_h = cell.wx.shape[1];
  const std::size_t hdim = four_h / 4;
  std::vector<double> pre(cell.b.data);
  for (std::size_t i = 0; i < in; ++i) {
    const double v = x[i];
    const double* row = cell.wx.data.data() + i * four_h;
    for (std::size_t j = 0; j < four_h; ++j) pre[j] += v * row[j];
  }
  for (std::size_t i = 0; i < hdim; ++i) {
    const double v = h_in.data[i];
    const double* row = cell.wh.data.data() + i * four_h;
    for (std::size_t j = 0; j < four_h; ++j) pre[j] += v * row[j];
  }
  c_out = Tensor::zeros({hdim});
  h_out = Tensor::zeros({hdim});
  for (std::size_t j = 0; j < hdim; ++j) {
    const double ig = sigmoid_scalar(pre[j]);
    const double fg = sigmoid_scalar(pre[hdim + j]);
    const double gg = std::tanh(pre[2 * hdim + j]);
    const double og = sigmoid_scalar(pre[3 * hdim + j]);
    const double c = fg * c_in.data[j] + ig * gg;
    c_out.data[j] = c;
    h_out.data[j] = og * std::tanh(c);
  }
}

MemoryState memory_from_flat(const GeneratorConfig& config,
                             std::span<const double> flat) {
  MemoryState mem;
  const std::size_t L = config.latent_dim;
  mem.c.reserve(config.lstm_depth);
  mem.h.reserve(config.lstm_depth);
  for (std::size_t l = 0; l < config.lstm_depth; ++l) {
    Tensor c = Tensor::zeros({L});
    Tensor h = Tensor::zeros({L});
    for (std::size_t i = 0; i < L; ++i) {
      c.data[i] = flat[2 * l * L + i];
      h.data[i] = flat[(2 * l + 1) * L + i];
    }
    mem.c.push_back(std::move(c));
    mem.h.push_back(std::move(h));
  }
  return mem;
}

}  // namespace

GeneratorState init_state(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  GeneratorState state;
  state.config = config;
  Rng rng(seed);
  const std::size_t L = config.latent_dim;
  state.z = Tensor::zeros({L});
  for (double& v : state.z.data) v = rng.normal();
  state.g0 = init_mlp2(rng, L, config.g0_hidden, 2 * config.lstm_depth * L);
  state.encoder =
      init_mlp2(rng, config.target_param_count, config.enc_hidden, L);
  const double cell_bound = 1.0 / std::sqrt(static_cast<double>(L));
  state.cells.reserve(config.lstm_depth);
  for (std::size_t l = 0; l < config.lstm_depth; ++l) {
    LstmLayerParams cell;
    cell.wx = uniform_tensor(rng, {L, 4 * L}, cell_bound);
    cell.wh = uniform_tensor(rng, {L, 4 * L}, cell_bound);
    cell.b = uniform_tensor(rng, {4 * L}, cell_bound);
    state.cells.push_back(std::move(cell));
  }
  state.decoder =
      init_mlp2(rng, L, config.dec_hidden, config.target_param_count);
  state.memory = memory_from_flat(
      config, mlp2_value(state.g0, std::span<const double>(state.z.data)));
  return state;
}

namespace {

template <typename State, typename Fn>
void visit_params(State& state, Fn&& fn) {
  fn(state.g0.w1);
  fn(state.g0.b1);
  fn(state.g0.w2);
  fn(state.g0.b2);
  fn(state.encoder.w1);
  fn(state.encoder.b1);
  fn(state.encoder.w2);
  fn(state.encoder.b2);
  for (auto& cell : state.cells) {
    fn(cell.wx);
    fn(cell.wh);
    fn(cell.b);
  }
  fn(state.decoder.w1);
  fn(state.decoder.b1);
  fn(state.decoder.w2);
  fn(state.decoder.b2);
}

}  // namespace

std::vector<Tensor*> trainable_tensors(GeneratorState& state) {
  std::vector<Tensor*> out;
  visit_params(state, [&](Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> trainable_tensors(const GeneratorState& state) {
  std::vector<const Tensor*> out;
  visit_params(state, [&](const Tensor& t) { out.push_back(&t); });
  return out;
}

GeneratorVars stage(ad::Tape& tape, const GeneratorState& state) {
  GeneratorVars vars;
  std::vector<ad::Var> flat;
  visit_params(state,
               [&](const Tensor& t) { flat.push_back(tape.input(t)); });
  std::size_t i = 0;
  auto take = [&]() { return flat[i++]; };
  vars.g0 = {take(), take(), take(), take()};
  vars.encoder = {take(), take(), take(), take()};
  vars.cells.reserve(state.cells.size());
  for (std::size_t l = 0; l < state.cells.size(); ++l) {
    ad::Var wx = take();
    ad::Var wh = take();
    ad::Var b = take();
    vars.cells.push_back({wx, wh, b});
  }
  vars.decoder = {take(), take(), take(), take()};
  vars.flat = std::move(flat);
  return vars;
}

namespace {

// x: vector of length in. Returns the output vector of the perceptron.
ad::Var mlp2_forward(ad::Tape& tape, const Mlp2Vars& m, ad::Var x) {
  const std::size_t in = m.w1.value().shape[0];
  const std::size_t hidden = m.w1.value().shape[1];
  const std::size_t out = m.w2.value().shape[1];
  ad::Var x_row = tape.reshape(x, {1, in});
  ad::Var h_pre = tape.add(tape.matmul(x_row, m.w1),
                           tape.reshape(m.b1, {1, hidden}));
  ad::Var h = tape.tanh(h_pre);
  ad::Var y = tape.add(tape.matmul(h, m.w2), tape.reshape(m.b2, {1, out}));
  return tape.reshape(y, {out});
}

}  // namespace

ad::Var encode(ad::Tape& tape, const GeneratorConfig& config,
               const Mlp2Vars& encoder, ad::Var omega) {
  if (omega.value().data.size() != config.target_param_count) {
    throw ShapeError("encode: omega length " +
                     std::to_string(omega.value().data.size()) +
                     ", expected " +
                     std::to_string(config.target_param_count));
  }
  return mlp2_forward(tape, encoder, omega);
}

MemoryVars initial_memory(ad::Tape& tape, const GeneratorConfig& config,
                          const Mlp2Vars& g0, ad::Var z) {
  ad::Var flat = mlp2_forward(tape, g0, z);
  MemoryVars mem;
  const std::size_t L = config.latent_dim;
  for (std::size_t l = 0; l < config.lstm_depth; ++l) {
    mem.c.push_back(tape.slice(flat, 2 * l * L, (2 * l + 1) * L));
    mem.h.push_back(tape.slice(flat, (2 * l + 1) * L, (2 * l + 2) * L));
  }
  return mem;
}

StepResult step(ad::Tape& tape, const GeneratorConfig& config,
                std::span<const LstmLayerVars> cells, const MemoryVars& memory,
                ad::Var input) {
  const std::size_t L = config.latent_dim;
  if (cells.size() != config.lstm_depth ||
      memory.c.size() != config.lstm_depth ||
      memory.h.size() != config.lstm_depth) {
    throw ShapeError("step: cell or memory count does not match lstm_depth");
  }
  StepResult result;
  ad::Var x = input;
  for (std::size_t l = 0; l < config.lstm_depth; ++l) {
    ad::Var x_row = tape.reshape(x, {1, L});
    ad::Var h_row = tape.reshape(memory.h[l], {1, L});
    ad::Var pre = tape.add(
        tape.reshape(tape.add(tape.matmul(x_row, cells[l].wx),
                              tape.matmul(h_row, cells[l].wh)),
                     {4 * L}),
        cells[l].b);
    ad::Var ig = tape.sigmoid(tape.slice(pre, 0, L));
    ad::Var fg = tape.sigmoid(tape.slice(pre, L, 2 * L));
    ad::Var gg = tape.tanh(tape.slice(pre, 2 * L, 3 * L));
    ad::Var og = tape.sigmoid(tape.slice(pre, 3 * L, 4 * L));
    ad::Var c_next =
        tape.add(tape.mul(fg, memory.c[l]), tape.mul(ig, gg));
    ad::Var h_next = tape.mul(og, tape.tanh(c_next));
    result.memory.c.push_back(c_next);
    result.memory.h.push_back(h_next);
    x = h_next;
  }
  result.top_h = x;
  return result;
}

ad::Var decode(ad::Tape& tape, const GeneratorConfig& config,
               const Mlp2Vars& decoder, ad::Var hidden) {
  if (hidden.value().data.size() != config.latent_dim) {
    throw ShapeError("decode: hidden length " +
                     std::to_string(hidden.value().data.size()) +
                     ", expected " + std::to_string(config.latent_dim));
  }
  return mlp2_forward(tape, decoder, hidden);
}

ParamVector skip_combine(const ParamVector& omega_raw,
                         std::span<const ParamVector> history, double lambda,
                         std::size_t tau) {
  if (tau == 0 || history.empty()) return omega_raw;
  const std::size_t window = std::min(tau, history.size());
  ParamVector out = omega_raw;
  for (std::size_t k = history.size() - window; k < history.size(); ++k) {
    const ParamVector& past = history[k];
    if (past.values.size() != out.values.size()) {
      throw ShapeError("skip_combine: history entry length " +
                       std::to_string(past.values.size()) +
                       " does not match omega length " +
                       std::to_string(out.values.size()));
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      out.values[i] += lambda * past.values[i];
    }
  }
  return out;
}

Generated generate_next(ad::Tape& tape, const GeneratorState& state,
                        const GeneratorVars& vars) {
  const GeneratorConfig& config = state.config;
  MemoryVars mem0;
  ad::Var a;
  if (state.step_index == 0) {
    ad::Var z = tape.input(state.z);
    mem0 = initial_memory(tape, config, vars.g0, z);
    a = tape.input(Tensor::zeros({config.latent_dim}));
  } else {
    if (!state.last_omega.has_value()) {
      throw ShapeError("generate_next: no realized omega from previous step");
    }
    for (std::size_t l = 0; l < config.lstm_depth; ++l) {
      mem0.c.push_back(tape.input(state.memory.c[l]));
      mem0.h.push_back(tape.input(state.memory.h[l]));
    }
    ad::Var omega_prev = tape.input(
        Tensor{{config.target_param_count}, state.last_omega->values});
    a = encode(tape, config, vars.encoder, omega_prev);
  }
  StepResult sr = step(tape, config, vars.cells, mem0, a);
  ad::Var omega = decode(tape, config, vars.decoder, sr.top_h);
  if (config.tau > 0 && !state.history.empty()) {
    const std::size_t window = std::min(config.tau, state.history.size());
    Tensor acc = Tensor::zeros({config.target_param_count});
    for (std::size_t k = state.history.size() - window;
         k < state.history.size(); ++k) {
      const ParamVector& past = state.history[k];
      for (std::size_t i = 0; i < acc.data.size(); ++i) {
        acc.data[i] += config.lambda * past.values[i];
      }
    }
    omega = tape.add(omega, tape.input(acc));
  }
  return {omega, sr.memory};
}

Tensor encode_value(const GeneratorState& state, const ParamVector& omega) {
  if (omega.values.size() != state.config.target_param_count) {
    throw ShapeError("encode_value: omega length " +
                     std::to_string(omega.values.size()) + ", expected " +
                     std::to_string(state.config.target_param_count));
  }
  std::vector<double> a = mlp2_value(state.encoder, omega.values);
  Tensor out = Tensor::zeros({state.config.latent_dim});
  out.data = std::move(a);
  return out;
}

Tensor step_value(GeneratorState& state, const Tensor& input) {
  const GeneratorConfig& config = state.config;
  if (input.data.size() != config.latent_dim) {
    throw ShapeError("step_value: input length " +
                     std::to_string(input.data.size()) + ", expected " +
                     std::to_string(config.latent_dim));
  }
  MemoryState next;
  next.c.resize(config.lstm_depth);
  next.h.resize(config.lstm_depth);
  std::span<const double> x(input.data);
  for (std::size_t l = 0; l < config.lstm_depth; ++l) {
    lstm_step_value(state.cells[l], x, state.memory.c[l], state.memory.h[l],
                    next.c[l], next.h[l]);
    x = std::span<const double>(next.h[l].data);
  }
  Tensor top = next.h.back();
  state.memory = std::move(next);
  return top;
}

ParamVector decode_value(const GeneratorState& state, const NetSchema& schema,
                         const Tensor& hidden) {
  if (hidden.data.size() != state.config.latent_dim) {
    throw ShapeError("decode_value: hidden length " +
                     std::to_string(hidden.data.size()) + ", expected " +
                     std::to_string(state.config.latent_dim));
  }
  if (param_count(schema) != state.config.target_param_count) {
    throw ShapeError("decode_value: schema param count " +
                     std::to_string(param_count(schema)) +
                     " does not match generator target " +
                     std::to_string(state.config.target_param_count));
  }
  return ParamVector::from_values(
      schema, mlp2_value(state.decoder, std::span<const double>(hidden.data)));
}

void refresh_initial_memory(GeneratorState& state) {
  state.memory = memory_from_flat(
      state.config,
      mlp2_value(state.g0, std::span<const double>(state.z.data)));
}

void commit_step(GeneratorState& state, const ParamVector& omega,
                 MemoryState memory) {
  if (omega.values.size() != state.config.target_param_count) {
    throw ShapeError("commit_step: omega length " +
                     std::to_string(omega.values.size()) + ", expected " +
                     std::to_string(state.config.target_param_count));
  }
  state.last_omega = omega;
  if (state.config.tau > 0) {
    state.history.push_back(omega);
    while (state.history.size() > state.config.tau) state.history.pop_front();
  }
  state.memory = std::move(memory);
  ++state.step_index;
}

}  // namespace driftgen
