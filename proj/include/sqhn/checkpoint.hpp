#pragma once

#include <string>

#include "sqhn/model.hpp"

namespace sqhn {

/// Binary little-endian checkpoint: magic "SQHN", format version u32,
/// serialized Architecture, then per-edge matrices (f32), counts (u64),
/// mu (f32), grown (u32), t (u64). Load followed by save reproduces the
/// file byte for byte.
void save_checkpoint(const std::string& path, const ModelState& state);
ModelState load_checkpoint(const std::string& path);

} // namespace sqhn
