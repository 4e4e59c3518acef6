#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "espbo/box.hpp"
#include "espbo/rng.hpp"

namespace espbo {

// Budget and tolerances for the shared inner optimizer used by every
// acquisition maximization, Thompson-sample minimization, and final
// recommendation. The sweep covers the box with a low-discrepancy point set;
// the best sweep locations are then polished by coordinate descent with a
// shrinking step.
struct InnerOptOptions {
  int sweep_per_dim = 1000;   // sweep size = sweep_per_dim * dim
  int refine_starts = 5;      // how many sweep points get polished
  int refine_iters = 50;      // coordinate-descent iteration cap
  double x_tol = 1e-6;        // convergence tolerance, relative to box width
  double initial_step = 0.1;  // first step size, fraction of box width

  // Additional start points polished alongside the sweep winners (used by
  // the final recommendation to start from every observed point).
  std::vector<Eigen::VectorXd> extra_starts;
};

// Low-discrepancy sweep: a Kronecker sequence driven by the generalized
// golden ratio for the box dimension, shifted by a random offset drawn from
// rng. Returns a count x dim matrix of points inside the box.
Eigen::MatrixXd sweep_points(const Box& box, int count, Rng& rng);

// Coordinate descent from a single start: axis-aligned moves with a step
// that halves whenever no axis improves, clamped to the box.
Eigen::VectorXd refine_coordinate(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    Eigen::VectorXd start, const InnerOptOptions& opts);

// Full minimizer given a precomputed sweep (points and their objective
// values). Used when the sweep evaluations were produced in batch.
Eigen::VectorXd minimize_with_sweep(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    const Eigen::MatrixXd& pts, const Eigen::VectorXd& vals,
    const InnerOptOptions& opts);

// Full minimizer: sweep + refinement. rng only feeds the sweep offset.
Eigen::VectorXd minimize_in_box(
    const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
    Rng& rng, const InnerOptOptions& opts = {});

}  // namespace espbo
