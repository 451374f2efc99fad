#include "toa/dft.hpp"

#include <cmath>
#include <stdexcept>

namespace toa {

std::vector<int> dft_indices(int n) {
  if (n < 1) throw std::invalid_argument("dft_indices: length must be positive");
  std::vector<int> k(static_cast<std::size_t>(n));
  const int half = (n - 1) / 2;
  for (int m = 0; m < n; ++m) k[static_cast<std::size_t>(m)] = m <= half ? m : m - n;
  return k;
}

VectorXcd phase_ramp(double tau, int n, double sample_period) {
  if (n < 1) throw std::invalid_argument("phase_ramp: length must be positive");
  if (sample_period <= 0.0) throw std::invalid_argument("phase_ramp: sample period must be positive");
  const std::vector<int> k = dft_indices(n);
  VectorXcd ramp(n);
  const double scale = -2.0 * kPi * tau / (static_cast<double>(n) * sample_period);
  for (int m = 0; m < n; ++m)
    ramp(m) = std::polar(1.0, scale * static_cast<double>(k[static_cast<std::size_t>(m)]));
  return ramp;
}

UnitaryDft::UnitaryDft(int n) : n_(n), matrix_(n, n) {
  if (n < 1) throw std::invalid_argument("UnitaryDft: length must be positive");
  // Exact roots of unity, indexed modulo N to avoid large-angle rounding.
  std::vector<cplx> roots(static_cast<std::size_t>(n));
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k)
    roots[static_cast<std::size_t>(k)] =
        std::polar(inv_sqrt_n, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
  for (int m = 0; m < n; ++m) {
    for (int c = 0; c < n; ++c) {
      const long long idx = (static_cast<long long>(m) * c) % n;
      matrix_(m, c) = roots[static_cast<std::size_t>(idx)];
    }
  }
}

VectorXcd UnitaryDft::forward(const VectorXcd& x) const {
  if (x.size() != n_) throw std::invalid_argument("UnitaryDft::forward: length mismatch");
  return matrix_ * x;
}

VectorXcd UnitaryDft::inverse(const VectorXcd& x) const {
  if (x.size() != n_) throw std::invalid_argument("UnitaryDft::inverse: length mismatch");
  return matrix_.adjoint() * x;
}

MatrixXcd UnitaryDft::rows_forward(const MatrixXcd& y) const {
  if (y.cols() != n_) throw std::invalid_argument("UnitaryDft::rows_forward: column count mismatch");
  // Row-wise transform: row r of the result is F * row r. F is symmetric,
  // so Y F^T = Y F.
  return y * matrix_;
}

}  // namespace toa
