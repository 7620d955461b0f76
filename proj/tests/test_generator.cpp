#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "driftgen/errors.hpp"
#include "driftgen/generator.hpp"
#include "driftgen/rng.hpp"
#include "support/finite_diff.hpp"

using namespace driftgen;

namespace {

GeneratorConfig small_config() {
  GeneratorConfig c;
  c.latent_dim = 4;
  c.lstm_depth = 2;
  c.enc_hidden = 6;
  c.dec_hidden = 6;
  c.g0_hidden = 6;
  c.lambda = 0.1;
  c.tau = 3;
  c.target_param_count = 10;
  return c;
}

ParamVector random_omega(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ParamVector pv;
  pv.values.resize(n);
  for (double& v : pv.values) v = rng.uniform(-0.5, 0.5);
  return pv;
}

// Scalar head over the generated vector so backward has a single root.
double chain_value(const GeneratorState& state) {
  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  Generated g = generate_next(tape, state, vars);
  return tape.sum(tape.mul(g.omega, g.omega)).value().data[0];
}

void check_chain_gradients(const GeneratorState& state) {
  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  Generated g = generate_next(tape, state, vars);
  ad::Var root = tape.sum(tape.mul(g.omega, g.omega));
  ad::GradientMap gm = tape.backward(root);

  std::vector<const Tensor*> tensors = trainable_tensors(state);
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    std::vector<Tensor> leaves = {*tensors[k]};
    auto fn = [&](const std::vector<Tensor>& perturbed) {
      GeneratorState copy = state;
      *trainable_tensors(copy)[k] = perturbed[0];
      return chain_value(copy);
    };
    Tensor fd = testsupport::fd_gradient(fn, leaves, 0);
    CAPTURE(k);
    CHECK(testsupport::max_rel_err(gm.grad(vars.flat[k]), fd) < 1e-4);
  }
}

}  // namespace

TEST_CASE("initial state has the declared shapes and is seed-deterministic") {
  GeneratorConfig c;
  c.latent_dim = 8;
  c.lstm_depth = 2;
  c.target_param_count = 12;
  GeneratorState s1 = init_state(c, 99);
  REQUIRE(s1.memory.c.size() == 2);
  REQUIRE(s1.memory.h.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(s1.memory.c[l].shape == std::vector<std::size_t>{8});
    CHECK(s1.memory.h[l].shape == std::vector<std::size_t>{8});
  }
  CHECK(s1.z.shape == std::vector<std::size_t>{8});
  CHECK(s1.step_index == 0);
  CHECK_FALSE(s1.last_omega.has_value());

  GeneratorState s2 = init_state(c, 99);
  CHECK(s1.z.data == s2.z.data);
  CHECK(s1.decoder.w2.data == s2.decoder.w2.data);
  CHECK(s1.memory.h[1].data == s2.memory.h[1].data);

  GeneratorState s3 = init_state(c, 100);
  CHECK(s1.z.data != s3.z.data);
}

TEST_CASE("initial memory is the noise map output split into layer pairs") {
  GeneratorState state = init_state(small_config(), 4);
  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  ad::Var z = tape.input(state.z);
  MemoryVars mem = initial_memory(tape, state.config, vars.g0, z);
  for (std::size_t l = 0; l < state.config.lstm_depth; ++l) {
    for (std::size_t i = 0; i < state.config.latent_dim; ++i) {
      CHECK(mem.c[l].value().data[i] ==
            doctest::Approx(state.memory.c[l].data[i]).epsilon(1e-12));
      CHECK(mem.h[l].value().data[i] ==
            doctest::Approx(state.memory.h[l].data[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("encode rejects a vector of the wrong length") {
  GeneratorState state = init_state(small_config(), 1);
  CHECK_THROWS_AS(encode_value(state, random_omega(5, 0)), ShapeError);
  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  ad::Var bad = tape.input(Tensor::vec({1.0, 2.0}));
  CHECK_THROWS_AS(encode(tape, state.config, vars.encoder, bad), ShapeError);
}

TEST_CASE("chain gradients match difference quotients at the first step") {
  GeneratorState state = init_state(small_config(), 7);
  check_chain_gradients(state);
}

TEST_CASE("chain gradients match difference quotients after a commit") {
  GeneratorState state = init_state(small_config(), 8);
  commit_step(state, random_omega(10, 3), state.memory);
  check_chain_gradients(state);
}

TEST_CASE("the first step reaches the noise map but not the encoder") {
  GeneratorState state = init_state(small_config(), 15);
  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  Generated g = generate_next(tape, state, vars);
  ad::GradientMap gm = tape.backward(tape.sum(g.omega));
  CHECK(gm.reached(vars.g0.w1));
  CHECK_FALSE(gm.reached(vars.encoder.w1));

  commit_step(state, random_omega(10, 4), state.memory);
  ad::Tape tape2;
  GeneratorVars vars2 = stage(tape2, state);
  Generated g2 = generate_next(tape2, state, vars2);
  ad::GradientMap gm2 = tape2.backward(tape2.sum(g2.omega));
  CHECK_FALSE(gm2.reached(vars2.g0.w1));
  CHECK(gm2.reached(vars2.encoder.w1));
}

TEST_CASE("perturbing the encoder does not change the first generated vector") {
  GeneratorState state = init_state(small_config(), 23);
  ad::Tape t1;
  Generated g1 = generate_next(t1, state, stage(t1, state));
  for (double& v : state.encoder.w1.data) v += 0.5;
  for (double& v : state.encoder.b2.data) v -= 1.0;
  ad::Tape t2;
  Generated g2 = generate_next(t2, state, stage(t2, state));
  CHECK(g1.omega.value().data == g2.omega.value().data);
}

TEST_CASE("with the residual window off the chain is the plain path") {
  GeneratorConfig c = small_config();
  c.tau = 0;
  GeneratorState state = init_state(c, 31);
  commit_step(state, random_omega(10, 5), state.memory);
  CHECK(state.history.empty());

  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  Generated g = generate_next(tape, state, vars);

  ad::Tape ref;
  GeneratorVars rvars = stage(ref, state);
  ad::Var omega_prev =
      ref.input(Tensor::vec(std::vector<double>(state.last_omega->values)));
  ad::Var a = encode(ref, c, rvars.encoder, omega_prev);
  MemoryVars mem;
  for (std::size_t l = 0; l < c.lstm_depth; ++l) {
    mem.c.push_back(ref.input(state.memory.c[l]));
    mem.h.push_back(ref.input(state.memory.h[l]));
  }
  StepResult sr = step(ref, c, rvars.cells, mem, a);
  ad::Var raw = decode(ref, c, rvars.decoder, sr.top_h);
  CHECK(g.omega.value().data == raw.value().data);
}

TEST_CASE("residual window sums the most recent entries only") {
  ParamVector raw = random_omega(6, 11);
  std::vector<ParamVector> history = {random_omega(6, 1), random_omega(6, 2),
                                      random_omega(6, 3)};
  const double lambda = 0.25;
  ParamVector out = skip_combine(raw, history, lambda, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    const double want = raw.values[i] + lambda * (history[1].values[i] +
                                                  history[2].values[i]);
    CHECK(out.values[i] == doctest::Approx(want).epsilon(1e-12));
  }
  ParamVector same = skip_combine(raw, history, lambda, 0);
  CHECK(same.values == raw.values);
  ParamVector all = skip_combine(raw, history, lambda, 10);
  for (std::size_t i = 0; i < 6; ++i) {
    const double want =
        raw.values[i] + lambda * (history[0].values[i] + history[1].values[i] +
                                  history[2].values[i]);
    CHECK(all.values[i] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("commits keep only the last tau vectors, oldest first") {
  GeneratorState state = init_state(small_config(), 40);
  std::vector<ParamVector> omegas;
  for (std::uint64_t k = 0; k < 5; ++k) {
    omegas.push_back(random_omega(10, 100 + k));
    commit_step(state, omegas.back(), state.memory);
  }
  CHECK(state.step_index == 5);
  REQUIRE(state.history.size() == 3);
  CHECK(state.history[0].values == omegas[2].values);
  CHECK(state.history[1].values == omegas[3].values);
  CHECK(state.history[2].values == omegas[4].values);
  CHECK(state.last_omega->values == omegas[4].values);
}

TEST_CASE("value-level ops agree with the taped chain") {
  GeneratorState state = init_state(small_config(), 55);
  commit_step(state, random_omega(10, 6), state.memory);

  ad::Tape tape;
  GeneratorVars vars = stage(tape, state);
  Generated g = generate_next(tape, state, vars);

  GeneratorState copy = state;
  Tensor a = encode_value(copy, *copy.last_omega);
  Tensor top = step_value(copy, a);
  NetSchema probe;  // any schema with ten generated parameters works here
  probe.input_dim = 4;
  probe.layers = {{2, Activation::kTanh, true}};
  probe.output_activation = OutputActivation::kIdentity;
  probe.generated_suffix_len = 1;
  REQUIRE(param_count(probe) == 10);
  ParamVector raw = decode_value(copy, probe, top);
  std::vector<ParamVector> hist(state.history.begin(), state.history.end());
  ParamVector omega =
      skip_combine(raw, hist, state.config.lambda, state.config.tau);

  REQUIRE(omega.values.size() == g.omega.value().data.size());
  for (std::size_t i = 0; i < omega.values.size(); ++i) {
    CHECK(omega.values[i] ==
          doctest::Approx(g.omega.value().data[i]).epsilon(1e-12));
  }
  // The advanced memory must agree as well.
  for (std::size_t l = 0; l < state.config.lstm_depth; ++l) {
    for (std::size_t i = 0; i < state.config.latent_dim; ++i) {
      CHECK(copy.memory.c[l].data[i] ==
            doctest::Approx(g.memory.c[l].value().data[i]).epsilon(1e-12));
      CHECK(copy.memory.h[l].data[i] ==
            doctest::Approx(g.memory.h[l].value().data[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("step_value replaces the stored memory and returns the top state") {
  GeneratorState state = init_state(small_config(), 61);
  MemoryState before = state.memory;
  Tensor a = Tensor::zeros({state.config.latent_dim});
  Tensor top = step_value(state, a);
  CHECK(top.data == state.memory.h.back().data);
  bool changed = false;
  for (std::size_t l = 0; l < state.config.lstm_depth; ++l) {
    if (state.memory.c[l].data != before.c[l].data) changed = true;
  }
  CHECK(changed);
}

TEST_CASE("config validation rejects degenerate settings") {
  GeneratorConfig c = small_config();
  c.latent_dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.lstm_depth = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.target_param_count = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.lambda = std::nan("");
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
