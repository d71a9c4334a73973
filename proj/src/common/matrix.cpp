#include "common/matrix.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace dpa {

Matrix& Matrix::operator+=(const Matrix& other) {
  axpy(1.0, other);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  axpy(-1.0, other);
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

void Matrix::axpy(double s, const Matrix& other) {
  require(same_shape(other), "matrix shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

double Matrix::squared_norm() const noexcept {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return acc;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dpa
