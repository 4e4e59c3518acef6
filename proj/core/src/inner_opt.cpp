#include "espbo/inner_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace espbo {

namespace {

// Generalized golden ratio: the unique real root > 1 of x^(d+1) = x + 1.
// Its inverse powers give the best-known Kronecker (rank-1 lattice) sequence
// directions in d dimensions.
double generalized_golden(int dim) {
  double x = 1.5;
  for (int it = 0; it < 64; ++it)
    x = std::pow(1.0 + x, 1.0 / (dim + 1));
  return x;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

Eigen::MatrixXd sweep_points(const Box& box, int count, Rng& rng) {
  if (count <= 0) throw std::invalid_argument("sweep_points: count <= 0");
  const int d = box.dim();
  const double g = generalized_golden(d);
  Eigen::VectorXd alpha(d), offset(d);
  double inv = 1.0;
  for (int j = 0; j < d; ++j) {
    inv /= g;
    alpha[j] = inv;
    offset[j] = rng.uniform();
  }
  Eigen::MatrixXd pts(count, d);
  const Eigen::VectorXd width = box.width();
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < d; ++j)
      pts(i, j) = box.lo[j] + width[j] * frac(offset[j] + (i + 1) * alpha[j]);
  return pts;
}

Eigen::VectorXd refine_coordinate(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    Eigen::VectorXd start, const InnerOptOptions& opts) {
  const int d = box.dim();
  if (start.size() != d)
    throw std::invalid_argument("refine_coordinate: start dimension mismatch");
  Eigen::VectorXd x = box.clamp(std::move(start));
  const Eigen::VectorXd width = box.width();
  Eigen::VectorXd step = opts.initial_step * width;
  double fx = f(x);
  Eigen::VectorXd trial = x;
  for (int it = 0; it < opts.refine_iters; ++it) {
    bool improved = false;
    for (int j = 0; j < d; ++j) {
      for (double dir : {1.0, -1.0}) {
        double proposed =
            std::clamp(x[j] + dir * step[j], box.lo[j], box.hi[j]);
        if (proposed == x[j]) continue;
        trial = x;
        trial[j] = proposed;
        double ft = f(trial);
        if (ft < fx) {
          x[j] = proposed;
          fx = ft;
          improved = true;
          break;  // accept and move to the next axis
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if ((step.array() / width.array()).maxCoeff() < opts.x_tol) break;
    }
  }
  return x;
}

Eigen::VectorXd minimize_with_sweep(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    const Eigen::MatrixXd& pts, const Eigen::VectorXd& vals,
    const InnerOptOptions& opts) {
  if (pts.rows() != vals.size() || pts.rows() == 0)
    throw std::invalid_argument("minimize_with_sweep: sweep shape mismatch");
  const int n_starts = std::min<int>(opts.refine_starts, pts.rows());
  std::vector<int> order(pts.rows());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + n_starts, order.end(),
                    [&](int a, int b) { return vals[a] < vals[b]; });
  Eigen::VectorXd best = pts.row(order[0]).transpose();
  double best_val = vals[order[0]];
  auto consider = [&](const Eigen::VectorXd& start) {
    Eigen::VectorXd x = refine_coordinate(f, box, start, opts);
    double v = f(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  };
  for (int s = 0; s < n_starts; ++s)
    consider(pts.row(order[s]).transpose());
  for (const auto& start : opts.extra_starts) consider(start);
  return best;
}

Eigen::VectorXd minimize_in_box(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    Rng& rng, const InnerOptOptions& opts) {
  const int count = opts.sweep_per_dim * box.dim();
  Eigen::MatrixXd pts = sweep_points(box, count, rng);
  Eigen::VectorXd vals(count);
  Eigen::VectorXd x(box.dim());
  for (int i = 0; i < count; ++i) {
    x = pts.row(i).transpose();
    vals[i] = f(x);
  }
  return minimize_with_sweep(f, box, pts, vals, opts);
}

}  // namespace espbo
