#pragma once

#include <filesystem>
#include <string>

#include "padlab/conv.hpp"

namespace padlab {

// JSON document for a pipeline (schema version 1):
//
// {
//   "format": "padlab-network",
//   "version": 1,
//   "stages": [
//     {"type": "conv", "out_channels": .., "in_channels": .., "kh": ..,
//      "kw": .., "weights": [..], "bias": [..],
//      "padding": {"mode": "none"|"zero"|"reflect"|"circular", "pad": ..}},
//     {"type": "identity"},
//     {"type": "leaky_relu", "gamma": ..},
//     {"type": "upsample", "height": .., "width": ..}
//   ]
// }
//
// Weights are stored flat in [out][in][ky][kx] order.
std::string network_to_json(const NetworkSpec& net);

NetworkSpec network_from_json(const std::string& text);

void save_network(const NetworkSpec& net, const std::filesystem::path& path);
NetworkSpec load_network(const std::filesystem::path& path);

// FNV-1a hex hash of the canonical serialization.
std::string network_hash(const NetworkSpec& net);

}  // namespace padlab
