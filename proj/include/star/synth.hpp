#pragma once

#include "star/errors.hpp"
#include "star/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace star {

inline constexpr double kSpeedOfLight = 299792458.0;

using Mask = std::vector<bool>;
using Rng = std::mt19937_64;

struct SynthConfig {
  int window_len = 64;           // K
  int window_shift = 32;         // delta
  double sample_period = 0.27e-3;  // T_c [s]
  double carrier_freq = 60e9;      // f_c [Hz]
  int min_scatterers = 1;
  int max_scatterers = 4;
  double max_speed = 4.0;          // [m/s]
  double freq_walk_std = 15.0;     // [Hz] per window
  double min_amplitude = 0.5;
  double max_amplitude = 1.0;
  double snr_db = 20.0;            // +inf disables noise
  bool on_grid = false;            // snap every frequency to the DFT grid
  std::uint64_t seed = 1;
  std::string label = "synthetic";

  /// Largest Doppler shift produced by max_speed.
  double max_doppler() const { return max_speed * carrier_freq / kSpeedOfLight; }

  void validate() const {
    if (window_len < 1) throw ConfigError("window_len must be >= 1");
    if (window_shift < 1 || window_shift > window_len)
      throw ConfigError("window_shift must satisfy 0 < shift <= window_len");
    if (!(sample_period > 0)) throw ConfigError("sample_period must be > 0");
    if (!(carrier_freq > 0)) throw ConfigError("carrier_freq must be > 0");
    if (min_scatterers < 0 || min_scatterers > max_scatterers)
      throw ConfigError("scatterer range must satisfy 0 <= min <= max");
    if (max_scatterers >= window_len) throw ConfigError("max_scatterers must be well below window_len");
    if (max_speed < 0) throw ConfigError("max_speed must be >= 0");
    if (max_doppler() >= 1.0 / (2.0 * sample_period))
      throw ConfigError("max_speed aliases: Doppler exceeds 1/(2 T_c)");
    if (freq_walk_std < 0) throw ConfigError("freq_walk_std must be >= 0");
    if (min_amplitude < 0 || min_amplitude > max_amplitude)
      throw ConfigError("amplitude range must satisfy 0 <= min <= max");
    if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
  }
};

/// Ground-truth scatterer state for one window.
struct ToneSet {
  std::vector<cdouble> amplitudes;
  std::vector<double> freqs_hz;
};

struct SequenceMeta {
  SynthConfig config;
  std::vector<ToneSet> truth;  // one entry per generated window; empty for loaded captures
};

struct CirSequence {
  ComplexVector samples;
  Mask grid_mask;
  SequenceMeta meta;

  Eigen::Index size() const { return samples.size(); }
};

struct CirWindow {
  ComplexVector values;  // zero where mask is false
  Mask mask;
  int index = 0;
  int available = 0;
};

inline int count_true(const Mask& m) {
  int n = 0;
  for (bool b : m) n += b ? 1 : 0;
  return n;
}

/// Frequency and velocity resolution of a K-sample window.
struct DopplerAxis {
  double freq_resolution;   // delta f
  double max_freq;          // f_m
  double speed_resolution;  // delta v
  double max_speed;         // v_m
  std::vector<double> bin_hz;  // fftshifted: ascending from -K/2
};

inline DopplerAxis doppler_axis(int k, double sample_period, double carrier_freq) {
  if (k < 1 || !(sample_period > 0) || !(carrier_freq > 0))
    throw ConfigError("doppler_axis: arguments must be positive");
  DopplerAxis ax{};
  ax.freq_resolution = 1.0 / (k * sample_period);
  ax.max_freq = 1.0 / (2.0 * sample_period);
  ax.speed_resolution = kSpeedOfLight / (2.0 * carrier_freq * k * sample_period);
  ax.max_speed = kSpeedOfLight / (4.0 * carrier_freq * sample_period);
  ax.bin_hz.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) ax.bin_hz[static_cast<std::size_t>(i)] = (i - k / 2) * ax.freq_resolution;
  return ax;
}

/// Maps a DFT-ordered bin index to its fftshifted display row.
inline int fftshift_row(int bin, int k) { return (bin + k / 2) % k; }

/// Generates (n_windows - 1) * shift + K samples of a sum of complex tones whose
/// frequencies drift between windows by a clipped Gaussian random walk.
/// Scatterer parameters are held for `shift` samples at a time; window t starts
/// with state t.
inline CirSequence synth_sequence(const SynthConfig& cfg, int n_windows) {
  cfg.validate();
  if (n_windows < 1) throw ConfigError("n_windows must be >= 1");

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const int k = cfg.window_len;
  const int shift = cfg.window_shift;
  const double f_lim = cfg.max_doppler();
  const double df = 1.0 / (k * cfg.sample_period);

  auto snap = [&](double f) {
    if (!cfg.on_grid) return f;
    double s = std::round(f / df) * df;
    while (std::abs(s) > f_lim + 1e-9 && s != 0.0) s -= std::copysign(df, s);
    return s;
  };

  const int q = std::uniform_int_distribution<int>(cfg.min_scatterers, cfg.max_scatterers)(rng);
  ToneSet state;
  for (int i = 0; i < q; ++i) {
    const double mag = cfg.min_amplitude + (cfg.max_amplitude - cfg.min_amplitude) * unit(rng);
    state.amplitudes.push_back(std::polar(mag, two_pi * unit(rng)));
    const double v = cfg.max_speed * unit(rng);
    const double theta = two_pi * unit(rng);
    state.freqs_hz.push_back(snap(v * std::cos(theta) * cfg.carrier_freq / kSpeedOfLight));
  }

  const Eigen::Index len = static_cast<Eigen::Index>(n_windows - 1) * shift + k;
  CirSequence seq;
  seq.samples = ComplexVector::Zero(len);
  seq.grid_mask.assign(static_cast<std::size_t>(len), true);
  seq.meta.config = cfg;

  std::vector<double> phase(static_cast<std::size_t>(q), 0.0);
  for (int t = 0; t < n_windows; ++t) {
    if (t > 0) {
      for (auto& f : state.freqs_hz) {
        f = std::clamp(f + cfg.freq_walk_std * gauss(rng), -f_lim, f_lim);
        f = snap(f);
      }
    }
    seq.meta.truth.push_back(state);
    const Eigen::Index begin = static_cast<Eigen::Index>(t) * shift;
    const Eigen::Index end = (t == n_windows - 1) ? len : begin + shift;
    for (int i = 0; i < q; ++i) {
      const auto qi = static_cast<std::size_t>(i);
      const double w = two_pi * state.freqs_hz[qi] * cfg.sample_period;
      for (Eigen::Index n = begin; n < end; ++n)
        seq.samples[n] += state.amplitudes[qi] * std::polar(1.0, phase[qi] + w * static_cast<double>(n - begin));
      phase[qi] = std::fmod(phase[qi] + w * static_cast<double>(end - begin), two_pi);
    }
  }

  if (std::isfinite(cfg.snr_db)) {
    double ref_power = seq.samples.squaredNorm() / static_cast<double>(len);
    if (ref_power <= 0) {
      const double mid = 0.5 * (cfg.min_amplitude + cfg.max_amplitude);
      ref_power = mid * mid;
    }
    const double sigma = std::sqrt(ref_power / std::pow(10.0, cfg.snr_db / 10.0) / 2.0);
    for (Eigen::Index n = 0; n < len; ++n) seq.samples[n] += cdouble(sigma * gauss(rng), sigma * gauss(rng));
  }
  return seq;
}

inline int window_count(Eigen::Index len, int k, int shift) {
  if (len < k) return 0;
  return static_cast<int>((len - k) / shift) + 1;
}

/// Window t covers samples [t*shift, t*shift + K); its mask is the grid mask restricted to it.
inline std::vector<CirWindow> frame_windows(const CirSequence& seq, int k, int shift) {
  if (k < 1 || shift < 1) throw ConfigError("frame_windows: K and shift must be >= 1");
  if (seq.size() < k) throw ConfigError("frame_windows: sequence shorter than window length");
  if (static_cast<Eigen::Index>(seq.grid_mask.size()) != seq.size())
    throw ConfigError("frame_windows: mask length differs from sample count");
  const int n = window_count(seq.size(), k, shift);
  std::vector<CirWindow> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    CirWindow w;
    w.index = t;
    w.values = ComplexVector::Zero(k);
    w.mask.assign(static_cast<std::size_t>(k), false);
    const Eigen::Index base = static_cast<Eigen::Index>(t) * shift;
    for (int i = 0; i < k; ++i) {
      if (seq.grid_mask[static_cast<std::size_t>(base + i)]) {
        w.mask[static_cast<std::size_t>(i)] = true;
        w.values[i] = seq.samples[base + i];
      }
    }
    w.available = count_true(w.mask);
    out.push_back(std::move(w));
  }
  return out;
}

/// Replaces the mask of a full window, zeroing the values that become unavailable.
inline CirWindow apply_mask(const CirWindow& full, const Mask& mask) {
  CirWindow w = full;
  w.mask = mask;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) w.values[static_cast<Eigen::Index>(i)] = 0.0;
  w.available = count_true(mask);
  return w;
}

/// Training-time augmentation mask: p ~ U(0, p_max), each bit missing with probability p.
/// Redraws until at least one bit is available.
inline Mask gen_window_mask(int k, double p_max, Rng& rng) {
  if (!(p_max >= 0.0 && p_max < 1.0)) throw ConfigError("gen_window_mask: p_max must be in [0, 1)");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = p_max * unit(rng);
  Mask m(static_cast<std::size_t>(k));
  do {
    for (int i = 0; i < k; ++i) m[static_cast<std::size_t>(i)] = unit(rng) >= p;
  } while (count_true(m) == 0);
  return m;
}

/// Evaluation mask on the sample grid; every framed window keeps at least one sample.
inline Mask gen_grid_mask(Eigen::Index len, int k, int shift, double missing_fraction, Rng& rng) {
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw ConfigError("gen_grid_mask: missing_fraction must be in [0, 1)");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mask m(static_cast<std::size_t>(len));
  for (auto&& bit : m) bit = unit(rng) >= missing_fraction;
  const int n = window_count(len, k, shift);
  for (int t = 0; t < n; ++t) {
    const auto base = static_cast<std::size_t>(t) * static_cast<std::size_t>(shift);
    auto empty = [&] {
      for (int i = 0; i < k; ++i)
        if (m[base + static_cast<std::size_t>(i)]) return false;
      return true;
    };
    // An empty window has only false bits, so redrawing can only add samples.
    while (empty())
      for (int i = 0; i < k; ++i) m[base + static_cast<std::size_t>(i)] = unit(rng) >= missing_fraction;
  }
  return m;
}

/// Copy of `seq` with the given grid mask applied (unavailable samples zeroed).
inline CirSequence with_grid_mask(const CirSequence& seq, const Mask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != seq.size())
    throw ConfigError("with_grid_mask: mask length mismatch");
  CirSequence out = seq;
  out.grid_mask = mask;
  for (Eigen::Index i = 0; i < seq.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) out.samples[i] = 0.0;
  return out;
}

}  // namespace star
