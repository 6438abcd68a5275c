#pragma once

#include <filesystem>
#include <iosfwd>

#include "stca/model/params.hpp"

namespace stca::model {

struct Checkpoint {
  StcaConfig config;
  StcaParams<float> params;
};

// Layout, all integers little-endian:
//   "STCA1" | u32 json_len | config json |
//   per tensor: u32 name_len | name | u32 rank | u64 dims[rank] | f32 payload
// Tensors run to end of file.
void write_checkpoint(std::ostream& out, const StcaConfig& config, const StcaParams<float>& params);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const StcaConfig& config,
                     const StcaParams<float>& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stca::model
