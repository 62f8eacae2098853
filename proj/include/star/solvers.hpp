#pragma once

// Classical sparse recovery over the partial-Fourier model h = M F z + n:
// iterative hard thresholding, ISTA (complex LASSO) and orthogonal matching pursuit.

#include "star/errors.hpp"
#include "star/numerics.hpp"
#include "star/synth.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace star {

/// Row-selected inverse DFT: maps K DFT coefficients to the m available time samples.
class SensingOperator {
 public:
  explicit SensingOperator(const Mask& mask) : mask_(mask) {
    const int k = static_cast<int>(mask.size());
    for (int i = 0; i < k; ++i)
      if (mask[static_cast<std::size_t>(i)]) rows_.push_back(i);
    if (rows_.empty()) throw ConfigError("sensing operator needs at least one available sample");
    // Roots of unity; every entry of F_K is one of them (exponent reduced mod K).
    std::vector<cdouble> root(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) root[static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * std::numbers::pi * j / k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    phi_.resize(static_cast<Eigen::Index>(rows_.size()), k);
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (int c = 0; c < k; ++c)
        phi_(static_cast<Eigen::Index>(r), c) = scale * root[static_cast<std::size_t>((static_cast<long long>(rows_[r]) * c) % k)];
    // Phi^H Phi is circulant: G[a, b] = g[(b - a) mod K].
    gram_ = ComplexVector::Zero(k);
    for (int d = 0; d < k; ++d) {
      cdouble acc = 0.0;
      for (int n : rows_) acc += root[static_cast<std::size_t>((static_cast<long long>(n) * d) % k)];
      gram_[d] = acc / static_cast<double>(k);
    }
  }

  int window_len() const { return static_cast<int>(phi_.cols()); }
  int available() const { return static_cast<int>(phi_.rows()); }
  const std::vector<int>& rows() const { return rows_; }
  const Mask& mask() const { return mask_; }
  const ComplexMatrix& matrix() const { return phi_; }
  RealMatrix realized() const { return realize_matrix(phi_); }

  ComplexVector apply(const ComplexVector& z) const { return phi_ * z; }
  ComplexVector adjoint(const ComplexVector& r) const { return phi_.adjoint() * r; }

  /// Phi z when only the bins in `support` are nonzero.
  ComplexVector apply_sparse(const ComplexVector& z, const std::vector<int>& support) const {
    ComplexVector out = ComplexVector::Zero(phi_.rows());
    for (int j : support) out += phi_.col(j) * z[j];
    return out;
  }

  /// Phi^H Phi z using only the listed nonzero bins of z.
  ComplexVector gram_apply_sparse(const ComplexVector& z, const std::vector<int>& nonzero) const {
    const int k = window_len();
    ComplexVector out = ComplexVector::Zero(k);
    for (int b : nonzero)
      for (int a = 0; a < k; ++a) out[a] += gram_[((b - a) % k + k) % k] * z[b];
    return out;
  }

  /// The available samples of a window, in row order.
  ComplexVector measurements(const CirWindow& w) const {
    ComplexVector h(phi_.rows());
    for (std::size_t r = 0; r < rows_.size(); ++r) h[static_cast<Eigen::Index>(r)] = w.values[rows_[r]];
    return h;
  }

 private:
  Mask mask_;
  std::vector<int> rows_;
  ComplexMatrix phi_;
  ComplexVector gram_;
};

inline std::vector<int> nonzero_bins(const ComplexVector& z) {
  std::vector<int> nz;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] != cdouble(0.0)) nz.push_back(static_cast<int>(i));
  return nz;
}

inline SensingOperator build_sensing(const Mask& mask) { return SensingOperator(mask); }

struct SolveReport {
  RealizedDft z;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> residual_history;
  std::string note;
};

struct IhtOptions {
  int sparsity = 5;      // Omega
  double mu = 20.0;      // inverse step size
  int max_iter = 100;
  double tol = 1e-6;
};

namespace detail {

// Residual growing 10x over its starting value for 5 straight iterations.
class DivergenceWatch {
 public:
  explicit DivergenceWatch(double initial) : initial_(initial) {}
  bool update(double residual) {
    streak_ = (residual > 10.0 * initial_ && residual > 0.0) ? streak_ + 1 : 0;
    return streak_ >= 5;
  }

 private:
  double initial_;
  int streak_ = 0;
};

// Thresholded iterations exploit that iterates are sparse: Phi^H Phi z goes
// through the circulant Gram vector and Phi z only touches the nonzero bins.
template <typename Threshold>
SolveReport thresholded_iterations(const SensingOperator& op, const ComplexVector& h, double mu, int max_iter,
                                   double tol, ComplexVector z, Threshold&& threshold) {
  const ComplexVector b = op.adjoint(h) / mu;
  SolveReport rep;
  std::vector<int> nz = nonzero_bins(z);
  ComplexVector pz = op.apply_sparse(z, nz);
  DivergenceWatch watch((pz - h).norm());
  for (int it = 1; it <= max_iter; ++it) {
    ComplexVector next = b + z - op.gram_apply_sparse(z, nz) / mu;
    threshold(next);
    const double step = (next - z).norm();
    z.swap(next);
    nz = nonzero_bins(z);
    pz = op.apply_sparse(z, nz);
    rep.iterations = it;
    const double res = (pz - h).norm();
    rep.residual_history.push_back(res);
    if (!std::isfinite(res) || watch.update(res)) {
      rep.diverged = true;
      break;
    }
    if (step < tol) {
      rep.converged = true;
      break;
    }
  }
  rep.z = realize_vector(z);
  rep.final_residual = rep.residual_history.empty() ? (pz - h).norm() : rep.residual_history.back();
  return rep;
}

}  // namespace detail

/// z <- H_Omega(Phi^H h / mu + (I - Phi^H Phi / mu) z), starting from H_Omega(Phi^H h / mu).
inline SolveReport iht_solve(const CirWindow& window, const IhtOptions& opt) {
  if (opt.sparsity < 1) throw ConfigError("iht_solve: sparsity must be >= 1");
  if (!(opt.mu > 0)) throw ConfigError("iht_solve: mu must be > 0");
  const SensingOperator op(window.mask);
  const ComplexVector h = op.measurements(window);
  ComplexVector z0 = op.adjoint(h) / opt.mu;
  hard_threshold_complex(z0, opt.sparsity);
  return detail::thresholded_iterations(op, h, opt.mu, opt.max_iter, opt.tol, std::move(z0),
                                        [&](ComplexVector& v) { hard_threshold_complex(v, opt.sparsity); });
}

inline SolveReport iht_solve(const CirWindow& window, int sparsity, double mu, int max_iter, double tol) {
  return iht_solve(window, IhtOptions{sparsity, mu, max_iter, tol});
}

struct IstaOptions {
  std::optional<double> lambda;  // defaults to 0.1 * max |Phi^H h|
  double mu = 20.0;
  int max_iter = 100;
  double tol = 1e-6;
};

/// Same iteration as IHT with complex soft thresholding at lambda / mu, started from zero.
inline SolveReport ista_solve(const CirWindow& window, const IstaOptions& opt) {
  if (!(opt.mu > 0)) throw ConfigError("ista_solve: mu must be > 0");
  const SensingOperator op(window.mask);
  const ComplexVector h = op.measurements(window);
  const double lambda = opt.lambda ? *opt.lambda : 0.1 * op.adjoint(h).cwiseAbs().maxCoeff();
  if (lambda < 0) throw ConfigError("ista_solve: lambda must be >= 0");
  const double w = lambda / opt.mu;
  const int k = op.window_len();
  return detail::thresholded_iterations(op, h, opt.mu, opt.max_iter, opt.tol, ComplexVector::Zero(k),
                                        [&](ComplexVector& v) {
                                          for (Eigen::Index i = 0; i < v.size(); ++i) {
                                            const double mag = std::abs(v[i]);
                                            v[i] = mag > w ? v[i] * ((mag - w) / mag) : cdouble(0.0);
                                          }
                                        });
}

/// Greedy selection of Omega DFT atoms with a least-squares refit after each pick.
inline SolveReport omp_solve(const CirWindow& window, int sparsity) {
  const SensingOperator op(window.mask);
  if (sparsity < 1 || sparsity > op.available())
    throw ConfigError("omp_solve: sparsity must be in [1, available samples]");
  const ComplexVector h = op.measurements(window);
  const ComplexMatrix& phi = op.matrix();
  const int k = op.window_len();

  std::vector<int> support;
  std::vector<bool> excluded(static_cast<std::size_t>(k), false);
  ComplexVector coef;
  ComplexVector r = h;
  SolveReport rep;
  int rejected = 0;

  for (int step = 0; step < sparsity; ++step) {
    const ComplexVector corr = phi.adjoint() * r;
    bool added = false;
    while (!added) {
      int best = -1;
      double best_mag = -1.0;
      for (int j = 0; j < k; ++j) {
        if (excluded[static_cast<std::size_t>(j)]) continue;
        const double m = std::norm(corr[j]);
        if (m > best_mag) {
          best_mag = m;
          best = j;
        }
      }
      if (best < 0) break;
      excluded[static_cast<std::size_t>(best)] = true;
      std::vector<int> trial = support;
      trial.push_back(best);
      ComplexMatrix a(phi.rows(), static_cast<Eigen::Index>(trial.size()));
      for (std::size_t c = 0; c < trial.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = phi.col(trial[c]);
      Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
      qr.setThreshold(1e-10);
      if (qr.rank() < static_cast<Eigen::Index>(trial.size())) {
        ++rejected;
        continue;
      }
      coef = qr.solve(h);
      support = std::move(trial);
      r = h - a * coef;
      added = true;
    }
    if (!added) break;
    rep.iterations = step + 1;
    rep.residual_history.push_back(r.norm());
  }

  ComplexVector z = ComplexVector::Zero(k);
  for (std::size_t c = 0; c < support.size(); ++c) z[support[c]] = coef[static_cast<Eigen::Index>(c)];
  rep.z = realize_vector(z);
  rep.final_residual = r.norm();
  rep.converged = static_cast<int>(support.size()) == sparsity;
  if (rejected > 0) rep.note = std::to_string(rejected) + " rank-deficient atom(s) skipped";
  return rep;
}

/// Min-max normalization of a whole spectrogram to [0, 1]; a constant input maps to zeros.
inline std::vector<Spectrum> minmax_normalize(const std::vector<Spectrum>& spectra) {
  if (spectra.empty()) return {};
  double lo = spectra.front().minCoeff(), hi = spectra.front().maxCoeff();
  for (const auto& s : spectra) {
    lo = std::min(lo, s.minCoeff());
    hi = std::max(hi, s.maxCoeff());
  }
  std::vector<Spectrum> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) {
    if (hi > lo) out.emplace_back((s.array() - lo) / (hi - lo));
    else out.emplace_back(Spectrum::Zero(s.size()));
  }
  return out;
}

struct GroundTruth {
  std::vector<Spectrum> spectra;    // normalized to [0, 1]
  std::vector<RealizedDft> dft;     // raw converged IHT solutions
  std::vector<Spectrum> raw_power;  // |z|^2 before normalization
};

/// Options used when IHT must reach convergence (ground truth and the converged baseline).
inline IhtOptions converged_iht_options() { return IhtOptions{5, 20.0, 1000, 1e-6}; }

/// IHT at convergence on every complete window, converted to power and min-max normalized.
/// Missing grid samples are ignored: the full underlying samples are used.
inline GroundTruth ground_truth_spectrogram(const CirSequence& seq, int k, int shift,
                                            const IhtOptions& opt = converged_iht_options()) {
  CirSequence full = seq;
  full.grid_mask.assign(static_cast<std::size_t>(seq.size()), true);
  GroundTruth gt;
  for (const auto& w : frame_windows(full, k, shift)) {
    SolveReport rep = iht_solve(w, opt);
    if (rep.diverged) throw NumericError("IHT diverged on window " + std::to_string(w.index));
    gt.raw_power.push_back(bin_power(rep.z));
    gt.dft.push_back(std::move(rep.z));
  }
  gt.spectra = minmax_normalize(gt.raw_power);
  return gt;
}

}  // namespace star
