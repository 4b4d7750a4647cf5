#include "retv/tv.hpp"

#include <cmath>
#include <stdexcept>

namespace retv {

double tv_norm(const Image& x) {
  if (x.size() == 0 || !all_finite(x))
    throw std::invalid_argument("tv_norm: empty or non-finite input");
  const Index rows = x.rows(), cols = x.cols();
  const double* v = x.data();
  long double acc = 0.0;
  for (Index i = 0; i + 1 < rows; ++i) {
    const double* r0 = v + i * cols;
    const double* r1 = r0 + cols;
    for (Index j = 0; j + 1 < cols; ++j) {
      const double dv = r0[j] - r1[j];
      const double dh = r0[j] - r0[j + 1];
      acc += std::sqrt(dv * dv + dh * dh);
    }
    acc += std::fabs(r0[cols - 1] - r1[cols - 1]);
  }
  const double* last = v + (rows - 1) * cols;
  for (Index j = 0; j + 1 < cols; ++j) acc += std::fabs(last[j] - last[j + 1]);
  return double(acc);
}

namespace {

// d = s - w * L(p, q), where L(p,q)(i,j) = p(i,j) + q(i,j) - p(i-1,j) - q(i,j-1)
// with out-of-range dual entries treated as zero.  Written as shifted block
// axpys so every pass vectorizes; per-pixel boundary branches kill that.
void primal_from_dual(const Image& s, double w, const Image& p, const Image& q,
                      Image& d) {
  const Index rows = s.rows(), cols = s.cols();
  d = s;
  if (rows > 1) {
    d.topRows(rows - 1) -= w * p;
    d.bottomRows(rows - 1) += w * p;
  }
  if (cols > 1) {
    d.leftCols(cols - 1) -= w * q;
    d.rightCols(cols - 1) += w * q;
  }
}

}  // namespace

void TvProx::solve(const Image& s, double weight, int iters, Image& out,
                   bool warm) {
  if (s.size() == 0 || !all_finite(s))
    throw std::invalid_argument("tv_prox: empty or non-finite input");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("tv_prox: weight must be finite and >= 0");

  const Index rows = s.rows(), cols = s.cols();
  out.resize(rows, cols);
  if (weight == 0.0 || iters <= 0 || (rows == 1 && cols == 1)) {
    out = s;
    return;
  }

  const bool shape_ok = rows_ == rows && cols_ == cols &&
                        p_.rows() == rows - 1 && q_.cols() == cols - 1;
  if (!warm || !shape_ok) {
    p_ = Image::Zero(rows - 1, cols);
    q_ = Image::Zero(rows, cols - 1);
    rows_ = rows;
    cols_ = cols;
  }
  pb_.resize(rows - 1, cols);
  qb_.resize(rows, cols - 1);
  rp_ = p_;
  rq_ = q_;
  d_.resize(rows, cols);
  if (rows > 1 && cols > 1) norm_.resize(rows - 1, cols - 1);

  const double step = 1.0 / (8.0 * weight);
  double t = 1.0;

  for (int n = 0; n < iters; ++n) {
    primal_from_dual(s, weight, rp_, rq_, d_);

    // Ascent step on both dual fields (forward differences of the primal).
    if (rows > 1)
      pb_ = rp_ + step * (d_.topRows(rows - 1) - d_.bottomRows(rows - 1));
    if (cols > 1)
      qb_ = rq_ + step * (d_.leftCols(cols - 1) - d_.rightCols(cols - 1));

    // Projection: interior (vertical, horizontal) pairs onto the unit disc,
    // last-column p and last-row q entries onto [-1, 1].  Dividing by
    // max(1, |.|) keeps in-disc entries bit-identical and needs no branches.
    if (rows > 1 && cols > 1) {
      auto P = pb_.leftCols(cols - 1);
      auto Q = qb_.topRows(rows - 1);
      norm_ = (P.square() + Q.square()).sqrt().max(1.0);
      P /= norm_;
      Q /= norm_;
    }
    if (rows > 1) pb_.col(cols - 1) = pb_.col(cols - 1).max(-1.0).min(1.0);
    if (cols > 1)
      qb_.row(rows - 1) = qb_.row(rows - 1).max(-1.0).min(1.0);

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double gamma = (t - 1.0) / tn;
    t = tn;
    rp_ = pb_ + gamma * (pb_ - p_);
    rq_ = qb_ + gamma * (qb_ - q_);
    p_.swap(pb_);
    q_.swap(qb_);
  }

  primal_from_dual(s, weight, p_, q_, out);
}

Image tv_prox(const Image& s, double weight, int iters) {
  TvProx prox;
  Image out;
  prox.solve(s, weight, iters, out, false);
  return out;
}

}  // namespace retv
