#pragma once

#include "retv/image.hpp"

namespace retv {

// Isotropic total variation: Euclidean norm of the (down, right) difference
// pair over interior pixels, plus absolute differences along the last column
// and last row.  Degenerates to sum |x_{j+1} - x_j| for a single row/column.
double tv_norm(const Image& x);

// Proximal operator of weight * tv_norm:
//   argmin_z  1/2 ||z - s||^2 + weight * TV(z)
// solved on the dual with fast gradient projection (Beck & Teboulle).  The
// dual fields (p, q) live on vertical/horizontal edges; interior pairs are
// projected onto the unit disc, boundary entries onto [-1, 1], and the primal
// is recovered as z = s - weight * L(p, q).
class TvProx {
 public:
  // `warm` reuses the dual fields left by the previous call (same shape);
  // momentum restarts either way.
  void solve(const Image& s, double weight, int iters, Image& out,
             bool warm = false);

 private:
  Image p_, q_;    // latest accepted dual fields (reused on warm starts)
  Image pb_, qb_;  // candidate duals
  Image rp_, rq_;  // momentum points
  Image d_;        // primal scratch
  Image norm_;     // disc-projection scale scratch
  Index rows_ = 0, cols_ = 0;
};

// One-shot convenience wrapper.
Image tv_prox(const Image& s, double weight, int iters = 50);

}  // namespace retv
