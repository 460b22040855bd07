#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rscf {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double speed_of_light = 3e8;  // m/s
inline constexpr double pi = std::numbers::pi;

/// Invalid configuration or argument (bad ranges, unknown enum names, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry that no propagation model can evaluate.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Failure of a numerical kernel (factorization, inner solver).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed form was requested for schemes it does not cover.
class UnsupportedScheme : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Unit conversions. Powers are stored in watts internally.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }
inline double watt_to_dbm(double w) { return linear_to_db(w) + 30.0; }

/// Per-k / per-(k,l) arrays stored row-major as a flat vector.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, const T& init = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, init) {}

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Real trace of the product of two Hermitian matrices, tr(A B).
inline double trace_product(const CMat& a, const CMat& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace rscf
