#include "negexlm/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace negexlm::num {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw std::invalid_argument("tensor rank must be 1 or 2, got " + shape_string(shape));
  }
  for (auto d : shape) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive: " + shape_string(shape));
  }
}

Eigen::Index view_rows(const Shape& s) { return s.size() == 1 ? 1 : static_cast<Eigen::Index>(s[0]); }
Eigen::Index view_cols(const Shape& s) { return static_cast<Eigen::Index>(s.back()); }

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_ = Matrix::Zero(view_rows(shape_), view_cols(shape_));
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  check_shape(shape_);
  if (values.size() != shape_size(shape_)) {
    throw std::invalid_argument("tensor of shape " + shape_string(shape_) + " given " +
                                std::to_string(values.size()) + " values");
  }
  data_ = Eigen::Map<const Matrix>(values.data(), view_rows(shape_), view_cols(shape_));
}

Tensor::Tensor(Shape shape, Matrix values) : shape_(std::move(shape)), data_(std::move(values)) {
  check_shape(shape_);
  if (data_.rows() != view_rows(shape_) || data_.cols() != view_cols(shape_)) {
    throw std::invalid_argument("matrix does not match tensor shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(Matrix values) {
  Shape s{static_cast<std::size_t>(values.rows()), static_cast<std::size_t>(values.cols())};
  return Tensor(std::move(s), std::move(values));
}

bool Tensor::all_finite() const { return data_.allFinite(); }

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace negexlm::num
