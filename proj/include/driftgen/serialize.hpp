#ifndef DRIFTGEN_SERIALIZE_HPP_
#define DRIFTGEN_SERIALIZE_HPP_

#include <string>

#include "driftgen/generator.hpp"
#include "driftgen/net.hpp"
#include "driftgen/trainer.hpp"

namespace driftgen {

// All files are little-endian. A parameter vector file is a 16-byte header
// (4-byte magic, u32 schema hash, u64 count) followed by count 64-bit
// floats. State and checkpoint files reuse the same scalar encoding behind
// their own magics. Loads throw IoError naming the file on any mismatch.
void save_param_vector(const ParamVector& omega, const std::string& path);
ParamVector load_param_vector(const std::string& path);

void save_generator_state(const GeneratorState& state, const std::string& path);
GeneratorState load_generator_state(const std::string& path);

void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace driftgen

#endif  // DRIFTGEN_SERIALIZE_HPP_
