#pragma once

// Spectrogram quality metrics, the missing-measurement sweep, runtime benchmark,
// communication overhead arithmetic and spectrogram writers (CSV, PGM).

#include "star/model.hpp"
#include "star/solvers.hpp"
#include "star/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace star {

/// K x T image: frequency bins (DFT order) on rows, windows on columns.
inline RealMatrix to_image(const std::vector<Spectrum>& spectra) {
  if (spectra.empty()) return {};
  RealMatrix img(spectra.front().size(), static_cast<Eigen::Index>(spectra.size()));
  for (std::size_t t = 0; t < spectra.size(); ++t) {
    if (spectra[t].size() != img.rows()) throw ConfigError("spectrogram rows differ in length");
    img.col(static_cast<Eigen::Index>(t)) = spectra[t];
  }
  return img;
}

inline double rmse(const RealMatrix& recon, const RealMatrix& gt) {
  if (recon.rows() != gt.rows() || recon.cols() != gt.cols()) throw ConfigError("rmse: shape mismatch");
  if (gt.size() == 0) throw ConfigError("rmse: empty input");
  return std::sqrt((recon - gt).squaredNorm() / static_cast<double>(gt.size()));
}

inline double rmse(const std::vector<Spectrum>& recon, const std::vector<Spectrum>& gt) {
  if (recon.size() != gt.size()) throw ConfigError("rmse: shape mismatch");
  return rmse(to_image(recon), to_image(gt));
}

namespace detail {

inline double ssim_patch(const RealMatrix& a, const RealMatrix& b, Eigen::Index r, Eigen::Index c, Eigen::Index h,
                         Eigen::Index w) {
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto pa = a.block(r, c, h, w).array();
  const auto pb = b.block(r, c, h, w).array();
  const double n = static_cast<double>(h * w);
  const double ma = pa.sum() / n;
  const double mb = pb.sum() / n;
  const double va = (pa - ma).square().sum() / n;
  const double vb = (pb - mb).square().sum() / n;
  const double cov = ((pa - ma) * (pb - mb)).sum() / n;
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace detail

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights, population statistics).
/// Images smaller than 8 in either dimension use one window covering the whole image.
inline double ssim(const RealMatrix& recon, const RealMatrix& gt) {
  if (recon.rows() != gt.rows() || recon.cols() != gt.cols()) throw ConfigError("ssim: shape mismatch");
  if (gt.size() == 0) throw ConfigError("ssim: empty input");
  constexpr Eigen::Index win = 8;
  if (gt.rows() < win || gt.cols() < win) return detail::ssim_patch(recon, gt, 0, 0, gt.rows(), gt.cols());
  double total = 0.0;
  long long count = 0;
  for (Eigen::Index r = 0; r + win <= gt.rows(); ++r)
    for (Eigen::Index c = 0; c + win <= gt.cols(); ++c) {
      total += detail::ssim_patch(recon, gt, r, c, win, win);
      ++count;
    }
  return total / static_cast<double>(count);
}

inline double ssim(const std::vector<Spectrum>& recon, const std::vector<Spectrum>& gt) {
  if (recon.size() != gt.size()) throw ConfigError("ssim: shape mismatch");
  return ssim(to_image(recon), to_image(gt));
}

// ---------------------------------------------------------------------------
// Missing-measurement sweep

struct SweepRow {
  std::string method;
  double missing_fraction = 0.0;
  double rmse = 0.0;
  double rmse_stderr = 0.0;
  double ssim = 0.0;
  double ssim_stderr = 0.0;
  long long n_windows = 0;
  double median_ms_per_window = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  const SweepRow& find(const std::string& method, double fraction) const {
    for (const auto& r : rows)
      if (r.method == method && std::abs(r.missing_fraction - fraction) < 1e-12) return r;
    throw ConfigError("no sweep row for " + method);
  }
};

struct SweepOptions {
  std::vector<double> fractions{0.5, 0.75, 0.9};
  std::vector<std::string> methods{"star", "iht-1", "iht", "omp", "ista"};
  int window_len = 64;
  int window_shift = 32;
  IhtOptions iht = converged_iht_options();
  std::uint64_t seed = 11;
  int threads = 1;
  bool timing = true;
};

/// STAR is trained against normalized targets, so its output is scored as is, clipped to [0, 1].
inline std::vector<Spectrum> clip_unit(const std::vector<Spectrum>& s) {
  std::vector<Spectrum> out;
  out.reserve(s.size());
  for (const auto& v : s) out.push_back(v.cwiseMax(0.0).cwiseMin(1.0));
  return out;
}

inline bool is_classical_method(const std::string& m) {
  return m == "iht-1" || m == "iht" || m == "omp" || m == "ista";
}

namespace detail {

struct SequenceScore {
  double rmse = 0.0;
  double ssim = 0.0;
  long long windows = 0;
  std::vector<double> ms;
};

// Per-sequence ground truths computed once and shared by all fractions.
struct SweepTruth {
  std::vector<Spectrum> iht, omp, ista;
};

inline IstaOptions sweep_ista_options(const IhtOptions& iht) {
  IstaOptions o;
  o.mu = iht.mu;
  o.max_iter = iht.max_iter;
  o.tol = iht.tol;
  return o;
}

inline Spectrum solve_classical(const std::string& method, const CirWindow& w, const IhtOptions& iht) {
  if (method == "iht-1") {
    IhtOptions one = iht;
    one.max_iter = 1;
    return bin_power(iht_solve(w, one).z);
  }
  if (method == "iht") return bin_power(iht_solve(w, iht).z);
  if (method == "omp") return bin_power(omp_solve(w, std::min(iht.sparsity, w.available)).z);
  if (method == "ista") return bin_power(ista_solve(w, sweep_ista_options(iht)).z);
  throw ConfigError("unknown method " + method);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

inline std::pair<double, double> mean_stderr(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers; each index is handled exactly once.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Evaluates every method at every missing fraction on the test sequences.
/// Classical spectrograms are min-max normalized per sequence; learned models are
/// scored on their own output clipped to [0, 1]. The reference is the normalized
/// full-window IHT solution, except that OMP and ISTA are compared with their own
/// full-window solutions.
/// Scores are averaged over sequences; stderr is sample std / sqrt(n).
inline SweepResult sweep_missing(const std::vector<CirSequence>& test, const SweepOptions& opt,
                                 const std::map<std::string, ModelParams>& models) {
  if (test.empty()) throw ConfigError("sweep: no test sequences");
  for (double f : opt.fractions)
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("missing fractions must lie in [0, 1)");
  for (const auto& m : opt.methods) {
    if (is_classical_method(m)) continue;
    auto it = models.find(m);
    if (it == models.end()) throw ConfigError("no checkpoint supplied for learned method " + m);
    if (it->second.k() != opt.window_len) throw ConfigError("checkpoint for " + m + " has K != " +
                                                            std::to_string(opt.window_len));
  }
  const int k = opt.window_len;
  const bool need_omp = std::find(opt.methods.begin(), opt.methods.end(), "omp") != opt.methods.end();
  const bool need_ista = std::find(opt.methods.begin(), opt.methods.end(), "ista") != opt.methods.end();

  // Ground truths from the complete sequences.
  std::vector<detail::SweepTruth> truth(test.size());
  detail::parallel_for(test.size(), opt.threads, [&](std::size_t s) {
    CirSequence full = test[s];
    full.grid_mask.assign(static_cast<std::size_t>(full.size()), true);
    truth[s].iht = ground_truth_spectrogram(full, k, opt.window_shift, opt.iht).spectra;
    std::vector<Spectrum> omp, ista;
    for (const auto& w : frame_windows(full, k, opt.window_shift)) {
      if (need_omp) omp.push_back(detail::solve_classical("omp", w, opt.iht));
      if (need_ista) ista.push_back(detail::solve_classical("ista", w, opt.iht));
    }
    truth[s].omp = minmax_normalize(omp);
    truth[s].ista = minmax_normalize(ista);
  });

  const std::size_t n_methods = opt.methods.size();
  SweepResult result;
  for (std::size_t fi = 0; fi < opt.fractions.size(); ++fi) {
    const double frac = opt.fractions[fi];
    // scores[s][m]
    std::vector<std::vector<detail::SequenceScore>> scores(test.size(),
                                                           std::vector<detail::SequenceScore>(n_methods));
    detail::parallel_for(test.size(), opt.threads, [&](std::size_t s) {
      Rng rng(opt.seed ^ (0x9e3779b97f4a7c15ULL * (fi + 1)) ^ (0xbf58476d1ce4e5b9ULL * (s + 1)));
      const CirSequence& seq = test[s];
      CirSequence masked = with_grid_mask(seq, gen_grid_mask(seq.size(), k, opt.window_shift, frac, rng));
      masked.samples *= input_scale(masked, k);
      const std::vector<CirWindow> windows = frame_windows(masked, k, opt.window_shift);
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const std::string& method = opt.methods[mi];
        detail::SequenceScore& sc = scores[s][mi];
        std::vector<Spectrum> out;
        out.reserve(windows.size());
        if (is_classical_method(method)) {
          for (const auto& w : windows) {
            const auto t0 = std::chrono::steady_clock::now();
            out.push_back(detail::solve_classical(method, w, opt.iht));
            if (opt.timing) sc.ms.push_back(1e3 * detail::seconds_since(t0));
          }
        } else {
          const ModelParams& p = models.at(method);
          PastBuffer buf(p.hyper.past, k);
          for (const auto& w : windows) {
            const auto t0 = std::chrono::steady_clock::now();
            out.push_back(star_forward_window(model_input(w, p.hyper), buf, p));
            if (opt.timing) sc.ms.push_back(1e3 * detail::seconds_since(t0));
          }
        }
        const std::vector<Spectrum>& ref =
            method == "omp" ? truth[s].omp : (method == "ista" ? truth[s].ista : truth[s].iht);
        const std::vector<Spectrum> norm =
            is_classical_method(method) ? minmax_normalize(out) : clip_unit(out);
        sc.rmse = rmse(norm, ref);
        sc.ssim = ssim(norm, ref);
        sc.windows = static_cast<long long>(windows.size());
      }
    });

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      std::vector<double> r, q, ms;
      long long n = 0;
      for (std::size_t s = 0; s < test.size(); ++s) {
        r.push_back(scores[s][mi].rmse);
        q.push_back(scores[s][mi].ssim);
        ms.insert(ms.end(), scores[s][mi].ms.begin(), scores[s][mi].ms.end());
        n += scores[s][mi].windows;
      }
      SweepRow row;
      row.method = opt.methods[mi];
      row.missing_fraction = frac;
      std::tie(row.rmse, row.rmse_stderr) = detail::mean_stderr(r);
      std::tie(row.ssim, row.ssim_stderr) = detail::mean_stderr(q);
      row.n_windows = n;
      row.median_ms_per_window = opt.timing ? detail::median(ms) : 0.0;
      result.rows.push_back(row);
    }
  }
  return result;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "method,missing_fraction,rmse,rmse_stderr,ssim,ssim_stderr,n_windows,median_ms_per_window\n";
  for (const auto& row : r.rows)
    os << row.method << ',' << format_double(row.missing_fraction) << ',' << format_double(row.rmse) << ','
       << format_double(row.rmse_stderr) << ',' << format_double(row.ssim) << ',' << format_double(row.ssim_stderr)
       << ',' << row.n_windows << ',' << format_double(row.median_ms_per_window) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Runtime benchmark

struct BenchOptions {
  double missing_fraction = 0.5;
  int n_windows = 200;
  int repeats = 3;
  std::vector<int> available_grid{8, 16, 32, 48, 64};
  std::uint64_t seed = 5;
};

struct BenchResult {
  double star_ms = 0.0;
  double iht1_ms = 0.0;
  double iht_ms = 0.0;
  double iht_median_iterations = 0.0;
  double speedup = 0.0;  // iht_ms / star_ms
  // STAR time per window against M_t: t ~ intercept + slope * M_t
  std::vector<std::pair<int, double>> star_vs_available;
  double slope_ms = 0.0;
  double intercept_ms = 0.0;
  double r_squared = 0.0;
};

namespace detail {

template <typename Fn>
double median_ms(int repeats, std::size_t n, Fn&& fn) {
  std::vector<double> samples;
  samples.reserve(n * static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r)
    for (std::size_t i = 0; i < n; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      fn(i);
      samples.push_back(1e3 * seconds_since(t0));
    }
  return median(samples);
}

}  // namespace detail

/// Median per-window wall time of STAR, one IHT iteration and IHT to convergence on
/// the windows of `seq` under a grid mask. Single-threaded by construction.
inline BenchResult bench_runtime(const CirSequence& seq, const ModelParams& p, const BenchOptions& opt,
                                 const IhtOptions& iht = converged_iht_options()) {
  const int k = p.k();
  Rng rng(opt.seed);
  CirSequence masked = with_grid_mask(seq, gen_grid_mask(seq.size(), k, std::max(1, k / 2), opt.missing_fraction, rng));
  masked.samples *= input_scale(masked, k);
  std::vector<CirWindow> windows = frame_windows(masked, k, std::max(1, k / 2));
  if (static_cast<int>(windows.size()) > opt.n_windows) windows.resize(static_cast<std::size_t>(opt.n_windows));
  if (windows.empty()) throw ConfigError("bench: no windows");

  const std::vector<CirWindow> star_windows = model_inputs(windows, p.hyper);
  BenchResult res;
  volatile double sink = 0.0;
  // Warm-up pass over everything.
  {
    PastBuffer buf(p.hyper.past, k);
    for (const auto& w : star_windows) sink = sink + star_forward_window(w, buf, p).sum();
    for (const auto& w : windows) sink = sink + iht_solve(w, iht).final_residual;
  }
  PastBuffer buf(p.hyper.past, k);
  res.star_ms = detail::median_ms(opt.repeats, windows.size(),
                                  [&](std::size_t i) { sink = sink + star_forward_window(star_windows[i], buf, p).sum(); });
  IhtOptions one = iht;
  one.max_iter = 1;
  res.iht1_ms = detail::median_ms(opt.repeats, windows.size(),
                                  [&](std::size_t i) { sink = sink + iht_solve(windows[i], one).final_residual; });
  std::vector<double> iters;
  res.iht_ms = detail::median_ms(opt.repeats, windows.size(), [&](std::size_t i) {
    const SolveReport rep = iht_solve(windows[i], iht);
    sink = sink + rep.final_residual;
    iters.push_back(rep.iterations);
  });
  res.iht_median_iterations = detail::median(iters);
  res.speedup = res.star_ms > 0 ? res.iht_ms / res.star_ms : 0.0;

  // STAR time against the number of available samples, same windows with fixed-size masks.
  std::vector<double> xs, ys;
  for (int m : opt.available_grid) {
    if (m < 1 || m > k) continue;
    std::vector<CirWindow> ws;
    for (const auto& w : windows) {
      std::vector<int> idx(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      Mask mask(static_cast<std::size_t>(k), false);
      for (int i = 0; i < m; ++i) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;
      CirWindow full = w;
      full.mask.assign(static_cast<std::size_t>(k), true);
      ws.push_back(model_input(apply_mask(full, mask), p.hyper));
    }
    PastBuffer b2(p.hyper.past, k);
    const double t = detail::median_ms(opt.repeats, ws.size(),
                                       [&](std::size_t i) { sink = sink + star_forward_window(ws[i], b2, p).sum(); });
    res.star_vs_available.emplace_back(m, t);
    xs.push_back(m);
    ys.push_back(t);
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    res.slope_ms = sxx > 0 ? sxy / sxx : 0.0;
    res.intercept_ms = my - res.slope_ms * mx;
    res.r_squared = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Overhead

struct OverheadParams {
  int trn_symbols_per_estimate = 768;
  int preamble_symbols = 4352;
  int psdu_bytes = 4096;
  int packets_per_window = 10;
  int window_slots = 64;
  double bits_per_symbol = 1.625;  // MCS 9: pi/2-QPSK, code rate 13/16

  void validate() const {
    if (trn_symbols_per_estimate < 1 || preamble_symbols < 0 || psdu_bytes < 1 || packets_per_window < 1 ||
        window_slots < 1 || !(bits_per_symbol > 0))
      throw ConfigError("overhead parameters must be positive");
  }
};

/// Symbols carried by one packet: preamble plus the PSDU at the chosen modulation rate.
inline long long packet_symbols(const OverheadParams& p) {
  return p.preamble_symbols + static_cast<long long>(std::ceil(p.psdu_bytes * 8.0 / p.bits_per_symbol));
}

/// Added TRN symbols for `samples_per_window` channel estimates divided by the
/// symbols of the window's communication packets.
inline double overhead_estimate(int samples_per_window, const OverheadParams& p = {}) {
  p.validate();
  if (samples_per_window < 0) throw ConfigError("samples per window must be >= 0");
  const double added = static_cast<double>(samples_per_window) * p.trn_symbols_per_estimate;
  return added / static_cast<double>(p.packets_per_window * packet_symbols(p));
}

inline std::string overhead_assumptions(const OverheadParams& p) {
  std::ostringstream os;
  os << "trn_symbols_per_estimate=" << p.trn_symbols_per_estimate << " preamble_symbols=" << p.preamble_symbols
     << " psdu_bytes=" << p.psdu_bytes << " packets_per_window=" << p.packets_per_window
     << " window_slots=" << p.window_slots << " bits_per_symbol=" << format_double(p.bits_per_symbol)
     << " packet_symbols=" << packet_symbols(p);
  return os.str();
}

// ---------------------------------------------------------------------------
// Spectrogram output

/// CSV with one row per window and fftshifted bins as columns (bin_-K/2 ... bin_K/2-1).
inline std::string spectrogram_csv(const std::vector<Spectrum>& spectra) {
  std::ostringstream os;
  os << "window";
  const int k = spectra.empty() ? 0 : static_cast<int>(spectra.front().size());
  for (int r = 0; r < k; ++r) os << ",bin_" << (r - k / 2);
  os << '\n';
  for (std::size_t t = 0; t < spectra.size(); ++t) {
    os << t;
    for (int r = 0; r < k; ++r) os << ',' << format_double(spectra[t][(r + (k + 1) / 2) % k]);
    os << '\n';
  }
  return os.str();
}

/// 8-bit binary PGM: rows are fftshifted frequency bins (most negative first), columns are windows.
inline std::vector<std::uint8_t> spectrogram_pgm(const std::vector<Spectrum>& spectra) {
  const std::vector<Spectrum> norm = minmax_normalize(spectra);
  const int k = norm.empty() ? 0 : static_cast<int>(norm.front().size());
  const std::string header = "P5\n" + std::to_string(norm.size()) + " " + std::to_string(k) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (int r = 0; r < k; ++r)
    for (const auto& s : norm) {
      const double v = std::clamp(s[(r + (k + 1) / 2) % k], 0.0, 1.0);
      out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
  return out;
}

}  // namespace star
