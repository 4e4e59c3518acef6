#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "espbo/box.hpp"
#include "espbo/rng.hpp"

namespace espbo {

// A benchmark objective: a deterministic function over a box, with the true
// minimum value attached when it is known (used for error reporting only,
// never by the optimizer).
struct Objective {
  std::string name;
  Box bounds;
  std::function<double(const Eigen::VectorXd&)> eval;
  std::optional<double> true_min;

  int dim() const { return bounds.dim(); }
  double operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

// Branin function on [-5, 10] x [0, 15]; three global minima with value
// ~0.397887.
double branin(const Eigen::VectorXd& x);
Objective make_branin();

// Hartmann 3-dimensional function on the unit cube; global minimum
// ~-3.862782.
double hartmann3(const Eigen::VectorXd& x);
Objective make_hartmann3();

// Tabular point set: n points with d coordinates and one value each.
struct PointCloud {
  Eigen::MatrixXd coords;  // n x d
  Eigen::VectorXd values;  // n
};

// Parses a CSV of d coordinate columns followed by one value column. A
// header row is detected by its first field failing numeric parsing and is
// skipped. Throws std::invalid_argument on ragged rows, fewer than two
// columns, non-numeric data cells, or an empty table.
PointCloud load_point_cloud_csv(const std::string& path);
PointCloud parse_point_cloud_csv(std::istream& in, const std::string& where);

// Nearest-neighbor lookup objective over a point cloud: evaluating x returns
// the value of the closest point in Euclidean distance (ties to the lowest
// row index). Bounds are the cloud's coordinate-wise extremes. The true
// minimum is left unset: the lookup's minimum over the continuous box equals
// min(values), but the cloud is treated as opaque data.
Objective nearest_neighbor_objective(PointCloud cloud);

// Resolves an objective spec string: "branin", "hartmann3", or
// "csv:<path>".
Objective make_objective(const std::string& spec);

// Wraps an objective with additive Gaussian observation noise drawn from a
// dedicated stream. noise_sd = 0 gives exact evaluations.
class NoisyBlackBox {
 public:
  NoisyBlackBox(Objective obj, double noise_sd, Rng rng);

  double operator()(const Eigen::VectorXd& x);
  const Objective& objective() const { return obj_; }

 private:
  Objective obj_;
  double noise_sd_;
  Rng rng_;
};

}  // namespace espbo
