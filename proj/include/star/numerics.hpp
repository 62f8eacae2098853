#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace star {

using cdouble = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Length-K non-negative micro-Doppler spectrum.
using Spectrum = Eigen::VectorXd;
/// Length-2K realized DFT coefficients, real parts first then imaginary parts.
using RealizedDft = Eigen::VectorXd;

/// Complex vector of length N to real vector [Re(x); Im(x)] of length 2N.
inline RealVector realize_vector(const ComplexVector& x) {
  const Eigen::Index n = x.size();
  RealVector out(2 * n);
  out.head(n) = x.real();
  out.tail(n) = x.imag();
  return out;
}

inline ComplexVector complexify_vector(const RealVector& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("realized vector must have even length");
  const Eigen::Index n = x.size() / 2;
  ComplexVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = {x[i], x[i + n]};
  return out;
}

/// Complex M x N matrix to the 2M x 2N block matrix [[Re, -Im], [Im, Re]].
inline RealMatrix realize_matrix(const ComplexMatrix& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  RealMatrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

/// Unitary inverse DFT matrix, F[n, m] = exp(j 2 pi n m / N) / sqrt(N).
inline ComplexMatrix inverse_dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("DFT size must be >= 1");
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      // Reduce the exponent modulo n first so large products keep full accuracy.
      const long long k = (static_cast<long long>(r) * c) % n;
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
      f(r, c) = std::polar(scale, ang);
    }
  }
  return f;
}

/// Result of hard thresholding: the thresholded vector and the kept bin indices (ascending).
struct ThresholdResult {
  RealizedDft value;
  std::vector<int> support;
};

/// Squared complex magnitude of every bin of a realized vector.
inline Spectrum bin_power(const RealizedDft& z) {
  const Eigen::Index k = z.size() / 2;
  return z.head(k).array().square() + z.tail(k).array().square();
}

/// Keeps the `omega` complex bins of largest magnitude, zeroing the rest.
/// Bins are ranked on sqrt(z_i^2 + z_{i+K}^2); ties go to the lower index.
inline ThresholdResult hard_threshold(const RealizedDft& z, int omega) {
  if (z.size() % 2 != 0) throw std::invalid_argument("hard_threshold: odd-length input");
  const int k = static_cast<int>(z.size() / 2);
  if (omega < 0 || omega > k) throw std::invalid_argument("hard_threshold: omega out of range");

  const Spectrum power = bin_power(z);
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + omega, order.end(), [&](int a, int b) {
    if (power[a] != power[b]) return power[a] > power[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(omega));
  std::sort(order.begin(), order.end());

  ThresholdResult out{RealizedDft::Zero(z.size()), std::move(order)};
  for (int i : out.support) {
    out.value[i] = z[i];
    out.value[i + k] = z[i + k];
  }
  return out;
}

/// In-place hard thresholding of a complex vector; same ranking and tie rule as hard_threshold.
inline std::vector<int> hard_threshold_complex(ComplexVector& z, int omega) {
  const int k = static_cast<int>(z.size());
  if (omega < 0 || omega > k) throw std::invalid_argument("hard_threshold: omega out of range");
  const RealVector power = z.cwiseAbs2();
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + omega, order.end(), [&](int a, int b) {
    if (power[a] != power[b]) return power[a] > power[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(omega));
  std::sort(order.begin(), order.end());
  ComplexVector kept = ComplexVector::Zero(k);
  for (int i : order) kept[i] = z[i];
  z.swap(kept);
  return order;
}

/// Same thresholding but with a caller-supplied support (used to freeze supports).
inline RealizedDft apply_support(const RealizedDft& z, const std::vector<int>& support) {
  const Eigen::Index k = z.size() / 2;
  RealizedDft out = RealizedDft::Zero(z.size());
  for (int i : support) {
    out[i] = z[i];
    out[i + k] = z[i + k];
  }
  return out;
}

/// Elementwise sign(x) * max(|x| - w, 0).
inline RealVector soft_threshold(const RealVector& x, double w) {
  if (w < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  RealVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - w;
    out[i] = mag > 0 ? std::copysign(mag, x[i]) : 0.0;
  }
  return out;
}

/// Soft thresholding on complex bin magnitudes of a realized vector (complex l1 prox).
inline RealizedDft complex_soft_threshold(const RealizedDft& z, double w) {
  if (w < 0) throw std::invalid_argument("complex_soft_threshold: negative threshold");
  const Eigen::Index k = z.size() / 2;
  RealizedDft out = RealizedDft::Zero(z.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    const double mag = std::hypot(z[i], z[i + k]);
    if (mag > w) {
      const double s = (mag - w) / mag;
      out[i] = z[i] * s;
      out[i + k] = z[i + k] * s;
    }
  }
  return out;
}

inline int count_active_bins(const RealizedDft& z) {
  const Spectrum p = bin_power(z);
  return static_cast<int>((p.array() > 0.0).count());
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

}  // namespace star
