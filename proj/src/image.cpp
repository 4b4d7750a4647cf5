#include "retv/image.hpp"

#include <stdexcept>

namespace retv {

bool all_finite(const Image& image) { return image.isFinite().all(); }

double rmse_relative(const Image& estimate, const Image& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("rmse_relative: shape mismatch");
  const double tn = truth.matrix().norm();
  if (tn == 0.0) throw std::invalid_argument("rmse_relative: truth is identically zero");
  return (estimate - truth).matrix().norm() / tn;
}

Image scale_to_range(const Image& image, double lo, double hi) {
  if (image.size() == 0) throw std::invalid_argument("scale_to_range: empty image");
  if (!(lo < hi)) throw std::invalid_argument("scale_to_range: need lo < hi");
  const double mn = image.minCoeff();
  const double mx = image.maxCoeff();
  if (mx == mn) throw std::invalid_argument("scale_to_range: constant image");
  return lo + (image - mn) * ((hi - lo) / (mx - mn));
}

Image scale_to_mean(const Image& image, double target) {
  if (image.size() == 0) throw std::invalid_argument("scale_to_mean: empty image");
  if (!(target > 0.0)) throw std::invalid_argument("scale_to_mean: target must be positive");
  const double m = image.mean();
  if (!(m > 0.0)) throw std::invalid_argument("scale_to_mean: image mean must be positive");
  return image * (target / m);
}

}  // namespace retv
