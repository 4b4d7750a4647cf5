#include "retv/phantom.hpp"

#include <cmath>
#include <stdexcept>

namespace retv {
namespace {

struct Ellipse {
  double value;  // additive intensity
  double a, b;   // semi-axes (x, y)
  double x0, y0; // center
  double phi;    // rotation, degrees CCW
};

// Standard ten-ellipse head geometry.
constexpr Ellipse kGeometry[10] = {
    {0.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {0.0, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {0.0, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {0.0, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.0, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.0, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.0, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.0, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.0, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.0, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
};

constexpr double kOriginalValues[10] = {1.0,  -0.98, -0.02, -0.02, 0.01,
                                        0.01, 0.01,  0.01,  0.01,  0.01};
constexpr double kModifiedValues[10] = {1.0, -0.8, -0.2, -0.2, 0.1,
                                        0.1, 0.1,  0.1,  0.1,  0.1};

}  // namespace

Image shepp_logan(Index rows, Index cols, PhantomVariant variant) {
  if (rows < 16 || cols < 16)
    throw std::invalid_argument("shepp_logan: grid must be at least 16x16");

  const double* values = variant == PhantomVariant::Original ? kOriginalValues
                                                             : kModifiedValues;
  Ellipse table[10];
  for (int e = 0; e < 10; ++e) {
    table[e] = kGeometry[e];
    table[e].value = values[e];
  }

  Image out(rows, cols);
  const double cy = double(rows - 1) / 2.0;
  const double cx = double(cols - 1) / 2.0;
  for (Index i = 0; i < rows; ++i) {
    const double y = (cy - double(i)) / cy;  // row 0 is the top of the head
    for (Index j = 0; j < cols; ++j) {
      const double x = (double(j) - cx) / cx;
      double v = 0.0;
      for (const Ellipse& el : table) {
        const double rad = el.phi * M_PI / 180.0;
        const double c = std::cos(rad), s = std::sin(rad);
        const double dx = x - el.x0, dy = y - el.y0;
        const double u = dx * c + dy * s;
        const double w = -dx * s + dy * c;
        if ((u * u) / (el.a * el.a) + (w * w) / (el.b * el.b) <= 1.0)
          v += el.value;
      }
      out(i, j) = v > 0.0 ? (v < 1.0 ? v : 1.0) : 0.0;
    }
  }
  return out;
}

}  // namespace retv
