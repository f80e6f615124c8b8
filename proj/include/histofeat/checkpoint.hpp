#pragma once

// Checkpoint file: magic "HFNN", u32 version, then per named tensor:
//   u32 name length, UTF-8 name, u32 rank, u32 dims..., f32 LE payload.
// Tensor order is preserved; EOF terminates the list.

#include <string>

#include "histofeat/nn_engine.hpp"

namespace histofeat {

void save_checkpoint(const std::string& path, const nn::Params& params);
nn::Params load_checkpoint(const std::string& path);

}  // namespace histofeat
