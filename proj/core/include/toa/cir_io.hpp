// Channel impulse response files.
//
// A scenario is stored as one JSON document:
//
//   {
//     "carrier_hz": 1.5e10,
//     "array": {"rows": 8, "cols": 4, "spacing_m": 0.009993},
//     "noise_variance_w": 1.64e-12,
//     "sync_paths": [{"delay_s": 5.2e-8, "gain_re": 1.0, "gain_im": 0.0,
//                     "azimuth_deg": 12.0, "elevation_deg": -4.0}],
//     "intf_paths": []
//   }
//
// Field names are normative and unknown fields are rejected, so a file
// written for a newer schema fails loudly instead of being half-read.
// Writing is canonical (sorted keys, shortest round-trip numbers, paths
// ordered by delay), so write_cir(load_cir(f)) reproduces a canonical f
// byte for byte.
#pragma once

#include <string>

#include "toa/channel.hpp"

namespace toa {

// Loads and validates a scenario. Throws IoError if the file cannot be read,
// ParseError (with the parser's line/column info) on malformed JSON, and
// std::invalid_argument on schema or value violations. Path lists are sorted
// by delay on load.
MultipathScenario load_cir(const std::string& path);

// Writes the canonical form. Throws IoError on filesystem failure.
void write_cir(const std::string& path, const MultipathScenario& scenario);

}  // namespace toa
