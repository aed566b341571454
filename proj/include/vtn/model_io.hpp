#pragma once

#include <string>

#include "vtn/volterra.hpp"

namespace vtn {

/**
 * Binary model container: magic "VTN1", D, M, P, L, canonical site, sweep
 * state, rank chain, core entries (native-endian doubles) and a trailing
 * FNV-1a checksum over all preceding bytes.
 */
void save_model(const std::string& path, const VolterraModel& model);

/// Throws FormatError on unknown version tags, checksum mismatch (corrupt or truncated file) or bad shapes.
VolterraModel load_model(const std::string& path);

}  // namespace vtn
