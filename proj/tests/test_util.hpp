#pragma once

// Hand-rolled generators for property tests.

#include "star/star.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace star::testing {

inline ComplexVector random_complex(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return ComplexVector::NullaryExpr(n, [&] { return cdouble(g(rng), g(rng)); });
}

inline ComplexMatrix random_complex_matrix(int r, int c, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return ComplexMatrix::NullaryExpr(r, c, [&] { return cdouble(g(rng), g(rng)); });
}

inline RealVector random_real(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return RealVector::NullaryExpr(n, [&] { return g(rng); });
}

inline int random_int(int lo, int hi, Rng& rng) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Mask with exactly m available samples.
inline Mask random_mask(int k, int m, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Mask mask(static_cast<std::size_t>(k), false);
  for (int i = 0; i < m; ++i) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
  return mask;
}

inline CirWindow make_window(const ComplexVector& values, const Mask& mask) {
  CirWindow w;
  w.values = values;
  w.mask.assign(static_cast<std::size_t>(values.size()), true);
  return apply_mask(w, mask);
}

inline CirWindow full_window(const ComplexVector& values) {
  return make_window(values, Mask(static_cast<std::size_t>(values.size()), true));
}

/// Samples of on-grid tones: x[n] = sum_q a_q exp(j 2 pi b_q n / K) / sqrt(K), so the
/// unitary DFT coefficients are exactly a_q at bins b_q.
inline ComplexVector on_grid_tones(int k, const std::vector<int>& bins, const std::vector<cdouble>& amps) {
  ComplexVector x = ComplexVector::Zero(k);
  for (std::size_t q = 0; q < bins.size(); ++q)
    for (int n = 0; n < k; ++n)
      x[n] += amps[q] * std::polar(1.0 / std::sqrt(static_cast<double>(k)),
                                   2.0 * std::numbers::pi * static_cast<double>((bins[q] * n) % k) / k);
  return x;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("star_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Bins whose magnitude exceeds rel times the largest one; thresholding keeps Omega
/// bins even when some of them only hold rounding noise.
inline std::vector<int> significant_bins(const ComplexVector& z, double rel = 1e-9) {
  std::vector<int> out;
  const double top = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (std::abs(z[i]) > rel * top) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace star::testing
