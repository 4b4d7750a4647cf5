#include "retv/noise.hpp"

#include <stdexcept>

#include "retv/rng.hpp"

namespace retv {

NoiseModel NoiseModel::speckle(int looks) {
  if (looks < 1) throw std::invalid_argument("speckle: looks must be >= 1");
  return {Kind::Speckle, looks};
}

const char* to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::Bernoulli: return "bernoulli";
    case NoiseModel::Kind::Poisson: return "poisson";
    case NoiseModel::Kind::Speckle: return "speckle";
  }
  return "?";
}

Image sample(const NoiseModel& model, const Image& truth, Seed seed) {
  if (truth.size() == 0) throw std::invalid_argument("sample: empty truth");
  if (!all_finite(truth)) throw std::invalid_argument("sample: non-finite truth");

  const double mn = truth.minCoeff();
  const double mx = truth.maxCoeff();
  switch (model.kind) {
    case NoiseModel::Kind::Bernoulli:
      if (mn < 0.0 || mx > 1.0)
        throw std::invalid_argument("sample: Bernoulli truth must lie in [0, 1]");
      break;
    case NoiseModel::Kind::Poisson:
    case NoiseModel::Kind::Speckle:
      if (mn < 0.0)
        throw std::invalid_argument("sample: truth must be nonnegative");
      break;
  }

  Image out(truth.rows(), truth.cols());
  const double* x = truth.data();
  double* y = out.data();
  const Index n = truth.size();
  const double looks = double(model.looks);
  for (Index i = 0; i < n; ++i) {
    PixelRng rng(seed.value, std::uint64_t(i));
    switch (model.kind) {
      case NoiseModel::Kind::Bernoulli:
        y[i] = double(rng.bernoulli(x[i]));
        break;
      case NoiseModel::Kind::Poisson:
        y[i] = double(rng.poisson(x[i]));
        break;
      case NoiseModel::Kind::Speckle:
        y[i] = x[i] == 0.0 ? 0.0 : x[i] * rng.gamma(looks, looks);
        break;
    }
  }
  return out;
}

std::pair<Image, Image> empirical_moments(const std::vector<Image>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("empirical_moments: need at least 2 samples");
  const Index rows = samples[0].rows(), cols = samples[0].cols();
  for (const Image& s : samples)
    if (s.rows() != rows || s.cols() != cols)
      throw std::invalid_argument("empirical_moments: shape mismatch");

  Image mean = Image::Zero(rows, cols);
  for (const Image& s : samples) mean += s;
  mean /= double(samples.size());

  Image var = Image::Zero(rows, cols);
  for (const Image& s : samples) var += (s - mean).square();
  var /= double(samples.size() - 1);
  return {std::move(mean), std::move(var)};
}

}  // namespace retv
