#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace negexlm::num {

/// Row-major dense matrix used for all numeric storage.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense real array of rank 1 or 2. A rank-1 tensor of length n is stored
/// as a 1 x n matrix so that every tensor has a matrix view.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);
  Tensor(Shape shape, Matrix values);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(Matrix values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  std::span<const double> values() const { return {data_.data(), size()}; }
  std::span<double> values() { return {data_.data(), size()}; }

  const Matrix& as_matrix() const { return data_; }
  Matrix& as_matrix() { return data_; }

  double operator[](std::size_t i) const { return data_.data()[i]; }
  double& operator[](std::size_t i) { return data_.data()[i]; }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  Matrix data_;
};

}  // namespace negexlm::num
