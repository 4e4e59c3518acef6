#include "espbo/testbed.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace espbo {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

void check_in_bounds(const Eigen::VectorXd& x, const Box& box,
                     const char* name) {
  if (x.size() != box.dim())
    throw std::invalid_argument(std::string(name) + ": dimension mismatch");
  if (!box.contains(x))
    throw std::invalid_argument(std::string(name) + ": point outside domain");
}

Box branin_box() {
  Eigen::VectorXd lo(2), hi(2);
  lo << -5.0, 0.0;
  hi << 10.0, 15.0;
  return Box(lo, hi);
}

// Hartmann 3-d tableau (standard values).
const double kH3Alpha[4] = {1.0, 1.2, 3.0, 3.2};
const double kH3A[4][3] = {{3.0, 10.0, 30.0},
                           {0.1, 10.0, 35.0},
                           {3.0, 10.0, 30.0},
                           {0.1, 10.0, 35.0}};
const double kH3P[4][3] = {{0.3689, 0.1170, 0.2673},
                           {0.4699, 0.4387, 0.7470},
                           {0.1091, 0.8732, 0.5547},
                           {0.0381, 0.5743, 0.8828}};

bool parse_double(const std::string& field, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(field, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < field.size() &&
         std::isspace(static_cast<unsigned char>(field[pos])))
    ++pos;
  return pos == field.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

double branin(const Eigen::VectorXd& x) {
  static const Box box = branin_box();
  check_in_bounds(x, box, "branin");
  const double a = 1.0;
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double r = 6.0;
  const double s = 10.0;
  const double t = 1.0 / (8.0 * kPi);
  double inner = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * inner * inner + s * (1.0 - t) * std::cos(x[0]) + s;
}

Objective make_branin() {
  Objective obj;
  obj.name = "branin";
  obj.bounds = branin_box();
  obj.eval = [](const Eigen::VectorXd& x) { return branin(x); };
  obj.true_min = 0.3978873577297383;  // 5 / (4*pi)
  return obj;
}

double hartmann3(const Eigen::VectorXd& x) {
  static const Box box = Box::unit(3);
  check_in_bounds(x, box, "hartmann3");
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) {
      double dx = x[j] - kH3P[i][j];
      inner += kH3A[i][j] * dx * dx;
    }
    total -= kH3Alpha[i] * std::exp(-inner);
  }
  return total;
}

Objective make_hartmann3() {
  Objective obj;
  obj.name = "hartmann3";
  obj.bounds = Box::unit(3);
  obj.eval = [](const Eigen::VectorXd& x) { return hartmann3(x); };
  obj.true_min = -3.8627797873326625;
  return obj;
}

PointCloud parse_point_cloud_csv(std::istream& in, const std::string& where) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  Eigen::Index n_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], row[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      // Only the very first row may be non-numeric (a header).
      if (rows.empty() && n_cols == -1) {
        n_cols = static_cast<Eigen::Index>(fields.size());
        continue;
      }
      throw std::invalid_argument(where + ":" + std::to_string(line_no) +
                                  ": non-numeric data cell");
    }
    if (n_cols == -1) n_cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != n_cols)
      throw std::invalid_argument(where + ":" + std::to_string(line_no) +
                                  ": row has " + std::to_string(row.size()) +
                                  " fields, expected " +
                                  std::to_string(n_cols));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument(where + ": no data rows");
  if (n_cols < 2)
    throw std::invalid_argument(where +
                                ": need at least one coordinate column and "
                                "one value column");
  PointCloud cloud;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = n_cols - 1;
  cloud.coords.resize(n, d);
  cloud.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) cloud.coords(i, j) = rows[i][j];
    cloud.values[i] = rows[i][d];
  }
  return cloud;
}

PointCloud load_point_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CSV file: " + path);
  return parse_point_cloud_csv(in, path);
}

Objective nearest_neighbor_objective(PointCloud cloud) {
  const Eigen::Index n = cloud.coords.rows();
  if (n == 0 || cloud.values.size() != n)
    throw std::invalid_argument("nearest_neighbor_objective: bad cloud");
  Eigen::VectorXd lo = cloud.coords.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = cloud.coords.colwise().maxCoeff().transpose();
  // A degenerate coordinate (all points equal) would make an empty box;
  // widen it symmetrically so the domain stays valid.
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) {
      lo[j] -= 0.5;
      hi[j] += 0.5;
    }
  }
  Objective obj;
  obj.name = "csv";
  obj.bounds = Box(lo, hi);
  auto shared = std::make_shared<PointCloud>(std::move(cloud));
  obj.eval = [shared](const Eigen::VectorXd& x) {
    if (x.size() != shared->coords.cols())
      throw std::invalid_argument("nearest_neighbor: dimension mismatch");
    Eigen::Index best = 0;
    double bd = (shared->coords.row(0).transpose() - x).squaredNorm();
    for (Eigen::Index i = 1; i < shared->coords.rows(); ++i) {
      double di = (shared->coords.row(i).transpose() - x).squaredNorm();
      if (di < bd) {  // strict: ties keep the lowest row index
        bd = di;
        best = i;
      }
    }
    return shared->values[best];
  };
  return obj;
}

Objective make_objective(const std::string& spec) {
  if (spec == "branin") return make_branin();
  if (spec == "hartmann3") return make_hartmann3();
  if (spec.rfind("csv:", 0) == 0) {
    std::string path = spec.substr(4);
    if (path.empty())
      throw std::invalid_argument("make_objective: empty CSV path");
    return nearest_neighbor_objective(load_point_cloud_csv(path));
  }
  throw std::invalid_argument("make_objective: unknown objective '" + spec +
                              "'");
}

NoisyBlackBox::NoisyBlackBox(Objective obj, double noise_sd, Rng rng)
    : obj_(std::move(obj)), noise_sd_(noise_sd), rng_(rng) {
  if (noise_sd < 0.0 || !std::isfinite(noise_sd))
    throw std::invalid_argument("NoisyBlackBox: noise_sd must be >= 0");
}

double NoisyBlackBox::operator()(const Eigen::VectorXd& x) {
  double y = obj_.eval(x);
  if (noise_sd_ > 0.0) y += noise_sd_ * rng_.normal();
  return y;
}

}  // namespace espbo
