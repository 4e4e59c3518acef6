#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace espbo {

// Axis-aligned search domain. Bounds are inclusive; every point the library
// evaluates or stores is kept inside these bounds.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;

  Box(Eigen::VectorXd lower, Eigen::VectorXd upper)
      : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size())
      throw std::invalid_argument("Box: bound vectors differ in length");
    if (lo.size() == 0) throw std::invalid_argument("Box: empty bounds");
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
      if (!(lo[j] < hi[j]))
        throw std::invalid_argument("Box: lo[" + std::to_string(j) +
                                    "] must be strictly below hi[" +
                                    std::to_string(j) + "]");
    }
  }

  static Box unit(int dim) {
    return Box(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  Eigen::VectorXd width() const { return hi - lo; }

  bool contains(const Eigen::VectorXd& x) const {
    if (x.size() != lo.size()) return false;
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }

  Eigen::VectorXd clamp(Eigen::VectorXd x) const {
    if (x.size() != lo.size())
      throw std::invalid_argument("Box::clamp: dimension mismatch");
    return x.cwiseMax(lo).cwiseMin(hi);
  }
};

}  // namespace espbo
