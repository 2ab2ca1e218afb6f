#pragma once

#include "padlab/grid.hpp"

namespace padlab {

// Per-channel bilinear interpolation with align-corners semantics: source
// corner samples land exactly on target corner samples. A 1x1 axis
// broadcasts; resizing to the same size returns the map unchanged.
FeatureMap bilinear_resize(const FeatureMap& map, GridSize target);

}  // namespace padlab
