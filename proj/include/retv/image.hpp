#pragma once

#include <Eigen/Core>

namespace retv {

// 2-D grayscale raster. Row-major so (i, j) lands at data()[i * cols() + j],
// which keeps file I/O and the pixel-indexed RNG streams trivial.
template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Image = ImageT<double>;
using Index = Eigen::Index;

// Inclusive display / rescale range.
struct IntensityRange {
  double lo = 0.0;
  double hi = 1.0;
};

bool all_finite(const Image& image);

// ||estimate - truth||_F / ||truth||_F.  Throws if shapes differ or truth is
// identically zero.
double rmse_relative(const Image& estimate, const Image& truth);

// Affine rescale mapping min -> lo and max -> hi.  Throws on constant input.
Image scale_to_range(const Image& image, double lo, double hi);

// Multiplicative rescale to the requested mean; zero pixels stay zero.
// Throws unless mean(image) > 0 and target > 0.
Image scale_to_mean(const Image& image, double target);

}  // namespace retv
