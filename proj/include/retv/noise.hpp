#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "retv/image.hpp"

namespace retv {

struct Seed {
  std::uint64_t value = 0;
};

struct NoiseModel {
  enum class Kind { Bernoulli, Poisson, Speckle };

  Kind kind = Kind::Poisson;
  int looks = 1;  // number of looks S; meaningful for Speckle only

  static NoiseModel bernoulli() { return {Kind::Bernoulli, 1}; }
  static NoiseModel poisson() { return {Kind::Poisson, 1}; }
  static NoiseModel speckle(int looks);
};

// One observation of `truth` under the model.  Each pixel draws from its own
// counter-based stream, so results are independent of traversal order.
//   Bernoulli: y ~ Bernoulli(x), needs x in [0, 1]
//   Poisson:   y ~ Poisson(x), needs x >= 0 (Poisson(0) == 0 surely)
//   Speckle:   y = x * n, n ~ Gamma(shape = looks, rate = looks), x >= 0
Image sample(const NoiseModel& model, const Image& truth, Seed seed);

// Pixelwise sample mean and unbiased sample variance; needs >= 2 samples of
// identical shape.
std::pair<Image, Image> empirical_moments(const std::vector<Image>& samples);

const char* to_string(NoiseModel::Kind kind);

}  // namespace retv
