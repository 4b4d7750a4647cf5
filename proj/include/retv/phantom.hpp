#pragma once

#include "retv/image.hpp"

namespace retv {

enum class PhantomVariant {
  Original,  // classic low-contrast interior (features at 0.01..0.04)
  Modified   // high-contrast variant used for display
};

// Shepp-Logan head phantom rasterized on a rows x cols grid.  Pixel centers
// are mapped to [-1, 1]^2 per axis, ellipse intensities are accumulated and
// the result clamped to [0, 1].  Requires rows, cols >= 16.
Image shepp_logan(Index rows, Index cols,
                  PhantomVariant variant = PhantomVariant::Original);

}  // namespace retv
