#ifndef DRIFTGEN_GENERATOR_HPP_
#define DRIFTGEN_GENERATOR_HPP_

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "driftgen/net.hpp"
#include "driftgen/tape.hpp"
#include "driftgen/tensor.hpp"

namespace driftgen {

// Recurrent parameter generator: a stacked LSTM walks the domain sequence,
// an encoder maps the previous realized parameter vector into the LSTM
// input, and a decoder expands the top hidden state back into a full
// parameter vector for the predictive network.
struct GeneratorConfig {
  std::size_t latent_dim = 64;
  std::size_t lstm_depth = 10;
  std::size_t enc_hidden = 64;
  std::size_t dec_hidden = 64;
  std::size_t g0_hidden = 64;
  double lambda = 0.1;     // residual window coefficient
  std::size_t tau = 3;     // residual window size; 0 disables it
  std::size_t target_param_count = 1;  // length of the generated vector

  void validate() const;
};

// Two-layer perceptron, tanh hidden layer, linear output.
struct Mlp2 {
  Tensor w1, b1, w2, b2;
};

// One stacked-LSTM layer; gates packed along columns in order i, f, g, o.
struct LstmLayerParams {
  Tensor wx, wh, b;
};

// Cell and hidden vectors per layer, bottom to top.
struct MemoryState {
  std::vector<Tensor> c;
  std::vector<Tensor> h;
};

struct GeneratorState {
  GeneratorConfig config;
  Mlp2 g0;       // noise -> initial memory
  Mlp2 encoder;  // omega -> LSTM input
  std::vector<LstmLayerParams> cells;
  Mlp2 decoder;  // top hidden state -> omega
  Tensor z;      // noise vector, drawn once at init and kept
  MemoryState memory;
  std::optional<ParamVector> last_omega;  // realized omega of the previous domain
  std::deque<ParamVector> history;        // last tau realized omegas, oldest first
  std::size_t step_index = 0;             // domains consumed so far
};

GeneratorState init_state(const GeneratorConfig& config, std::uint64_t seed);

// Fixed-order access to every trainable tensor (z excluded). stage() creates
// tape leaves in the same order, so gradient maps line up index for index.
std::vector<Tensor*> trainable_tensors(GeneratorState& state);
std::vector<const Tensor*> trainable_tensors(const GeneratorState& state);

struct Mlp2Vars {
  ad::Var w1, b1, w2, b2;
};
struct LstmLayerVars {
  ad::Var wx, wh, b;
};
struct GeneratorVars {
  Mlp2Vars g0, encoder, decoder;
  std::vector<LstmLayerVars> cells;
  std::vector<ad::Var> flat;  // same order as trainable_tensors()
};

GeneratorVars stage(ad::Tape& tape, const GeneratorState& state);

struct MemoryVars {
  std::vector<ad::Var> c;
  std::vector<ad::Var> h;
};

// Tape-level pieces of the generation chain.
ad::Var encode(ad::Tape& tape, const GeneratorConfig& config,
               const Mlp2Vars& encoder, ad::Var omega);
MemoryVars initial_memory(ad::Tape& tape, const GeneratorConfig& config,
                          const Mlp2Vars& g0, ad::Var z);
struct StepResult {
  MemoryVars memory;
  ad::Var top_h;
};
StepResult step(ad::Tape& tape, const GeneratorConfig& config,
                std::span<const LstmLayerVars> cells, const MemoryVars& memory,
                ad::Var input);
ad::Var decode(ad::Tape& tape, const GeneratorConfig& config,
               const Mlp2Vars& decoder, ad::Var hidden);

// omega = omega_raw + lambda * sum of the last min(tau, len) history entries.
// tau == 0 returns omega_raw unchanged.
ParamVector skip_combine(const ParamVector& omega_raw,
                         std::span<const ParamVector> history, double lambda,
                         std::size_t tau);

// Builds the whole next-domain chain on the tape: at step 0 the memory comes
// from g0(z) and the LSTM input is zero; afterwards the stored memory and
// last realized omega enter as constants. The residual window sum is added as
// a constant term since history entries are detached by construction.
struct Generated {
  ad::Var omega;
  MemoryVars memory;
};
Generated generate_next(ad::Tape& tape, const GeneratorState& state,
                        const GeneratorVars& vars);

// Value-level counterparts for inference paths.
Tensor encode_value(const GeneratorState& state, const ParamVector& omega);
// Runs one LSTM step and replaces state.memory; returns the top hidden state.
Tensor step_value(GeneratorState& state, const Tensor& input);
ParamVector decode_value(const GeneratorState& state, const NetSchema& schema,
                         const Tensor& hidden);

// Records the realized omega of the domain just trained: sets last_omega,
// appends to the residual window (trimming to tau), advances step_index, and
// stores the post-step memory.
void commit_step(GeneratorState& state, const ParamVector& omega,
                 MemoryState memory);

// Recomputes memory from the current noise map; needed before the first
// value-level step once g0 has been trained past its init values.
void refresh_initial_memory(GeneratorState& state);

}  // namespace driftgen

#endif  // DRIFTGEN_GENERATOR_HPP_
