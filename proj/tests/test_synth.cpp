#include "test_util.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace star;
using namespace star::testing;

namespace {

SynthConfig quiet() {
  SynthConfig c;
  c.snr_db = std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace

TEST(Synth, LengthFollowsWindowCount) {
  SynthConfig c;
  const CirSequence s = synth_sequence(c, 10);
  EXPECT_EQ(s.size(), 9 * 32 + 64);
  EXPECT_EQ(s.meta.truth.size(), 10u);
  EXPECT_EQ(count_true(s.grid_mask), s.size());
}

TEST(Synth, NoScatterersNoNoiseIsZero) {
  SynthConfig c = quiet();
  c.min_scatterers = c.max_scatterers = 0;
  const CirSequence s = synth_sequence(c, 4);
  EXPECT_EQ(s.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Synth, NoScatterersWithNoiseIsNotZero) {
  SynthConfig c;
  c.min_scatterers = c.max_scatterers = 0;
  const CirSequence s = synth_sequence(c, 4);
  EXPECT_GT(s.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Synth, SingleOnGridToneHasOneDftBin) {
  SynthConfig c = quiet();
  c.min_scatterers = c.max_scatterers = 1;
  c.freq_walk_std = 0.0;
  c.on_grid = true;
  const CirSequence s = synth_sequence(c, 1);
  const ComplexVector z = inverse_dft_matrix(64).adjoint() * s.samples;
  const double df = 1.0 / (64 * c.sample_period);
  const int bin = static_cast<int>(std::lround(s.meta.truth[0].freqs_hz[0] / df));
  const int idx = ((bin % 64) + 64) % 64;
  for (int i = 0; i < 64; ++i) {
    if (i == idx) EXPECT_GT(std::abs(z[i]), 0.1);
    else EXPECT_LT(std::abs(z[i]), 1e-10) << "bin " << i;
  }
}

TEST(Synth, ZeroWalkKeepsFrequencies) {
  SynthConfig c;
  c.freq_walk_std = 0.0;
  const CirSequence s = synth_sequence(c, 12);
  for (const auto& ts : s.meta.truth) EXPECT_EQ(ts.freqs_hz, s.meta.truth.front().freqs_hz);
}

TEST(Synth, FrequenciesStayBelowAliasingLimitProperty) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SynthConfig c;
    c.seed = seed;
    c.freq_walk_std = 200.0;
    const double fm = 1.0 / (2.0 * c.sample_period);
    const CirSequence s = synth_sequence(c, 40);
    for (const auto& ts : s.meta.truth)
      for (double f : ts.freqs_hz) ASSERT_LT(std::abs(f), fm);
  }
}

TEST(Synth, DeterministicGivenSeed) {
  SynthConfig c;
  c.seed = 99;
  EXPECT_EQ(synth_sequence(c, 5).samples, synth_sequence(c, 5).samples);
  SynthConfig d = c;
  d.seed = 100;
  EXPECT_NE(synth_sequence(c, 5).samples, synth_sequence(d, 5).samples);
}

TEST(Synth, OnGridNoiselessWindowsHaveAtMostQBinsProperty) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig c = quiet();
    c.seed = seed;
    c.on_grid = true;
    c.window_shift = 64;  // parameters change only at window boundaries
    const CirSequence s = synth_sequence(c, 6);
    const ComplexMatrix fh = inverse_dft_matrix(64).adjoint();
    const auto windows = frame_windows(s, 64, 64);
    for (std::size_t t = 0; t < windows.size(); ++t) {
      const ComplexVector z = fh * windows[t].values;
      const int active = static_cast<int>((z.cwiseAbs().array() > 1e-8).count());
      ASSERT_LE(active, static_cast<int>(s.meta.truth[t].freqs_hz.size()));
    }
  }
}

TEST(Synth, ValidationRejectsBadConfigs) {
  SynthConfig c;
  c.window_shift = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.max_speed = 10.0;  // Doppler beyond 1/(2 T_c)
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.min_scatterers = 3;
  c.max_scatterers = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(synth_sequence(SynthConfig{}, 0), ConfigError);
}

TEST(Frame, WindowCounts) {
  CirSequence s;
  s.samples = ComplexVector::Zero(128);
  s.grid_mask.assign(128, true);
  EXPECT_EQ(frame_windows(s, 64, 32).size(), 3u);
  s.samples = ComplexVector::Zero(64);
  s.grid_mask.assign(64, true);
  EXPECT_EQ(frame_windows(s, 64, 32).size(), 1u);
  s.samples = ComplexVector::Zero(63);
  s.grid_mask.assign(63, true);
  EXPECT_THROW(frame_windows(s, 64, 32), ConfigError);
}

TEST(Frame, OverlapSharesValuesAndMask) {
  Rng rng(4);
  CirSequence s;
  s.samples = random_complex(64 + 5 * 32, rng);
  s = with_grid_mask(s, gen_grid_mask(s.size(), 64, 32, 0.5, rng));
  const auto w = frame_windows(s, 64, 32);
  for (std::size_t t = 1; t < w.size(); ++t)
    for (int i = 0; i < 32; ++i) {
      ASSERT_EQ(w[t].values[i], w[t - 1].values[i + 32]);
      ASSERT_EQ(w[t].mask[static_cast<std::size_t>(i)], w[t - 1].mask[static_cast<std::size_t>(i + 32)]);
    }
}

TEST(Masks, WindowMaskZeroCapIsFull) {
  Rng rng(1);
  EXPECT_EQ(count_true(gen_window_mask(64, 0.0, rng)), 64);
}

TEST(Masks, WindowMaskNeverEmptyProperty) {
  Rng rng(2);
  for (int i = 0; i < 20000; ++i) ASSERT_GE(count_true(gen_window_mask(2, 0.99, rng)), 1);
}

TEST(Masks, WindowMaskMeanMissingFraction) {
  Rng rng(3);
  const int k = 64, draws = 100000;
  double missing = 0.0;
  for (int i = 0; i < draws; ++i) missing += 1.0 - count_true(gen_window_mask(k, 0.9, rng)) / static_cast<double>(k);
  EXPECT_NEAR(missing / draws, 0.45, 0.01);
}

TEST(Masks, GridMaskFractionZeroIsFull) {
  Rng rng(1);
  EXPECT_EQ(count_true(gen_grid_mask(500, 64, 32, 0.0, rng)), 500);
}

TEST(Masks, GridMaskBinomialMean) {
  Rng rng(7);
  const Eigen::Index len = 64 + 2000 * 32;
  const Mask m = gen_grid_mask(len, 64, 32, 0.9, rng);
  CirSequence s;
  s.samples = ComplexVector::Zero(len);
  s.grid_mask = m;
  double total = 0.0;
  const auto windows = frame_windows(s, 64, 32);
  for (const auto& w : windows) {
    ASSERT_GE(w.available, 1);
    total += w.available;
  }
  EXPECT_NEAR(total / static_cast<double>(windows.size()), 6.4, 0.2);
}

TEST(Masks, RejectsOutOfRangeFractions) {
  Rng rng(1);
  EXPECT_THROW(gen_window_mask(8, 1.0, rng), ConfigError);
  EXPECT_THROW(gen_grid_mask(8, 8, 4, -0.1, rng), ConfigError);
}

TEST(DopplerAxis, TableValues) {
  const DopplerAxis ax = doppler_axis(64, 0.27e-3, 60e9);
  EXPECT_NEAR(ax.speed_resolution, 0.14, 0.005);
  // The formula gives 4.63 m/s; the tabulated 4.48 is 32 x 0.14.
  EXPECT_NEAR(ax.max_speed, 4.63, 0.01);
  EXPECT_NEAR(ax.freq_resolution, 1.0 / (64 * 0.27e-3), 1e-9);
  EXPECT_NEAR(ax.max_freq, 1.0 / (2 * 0.27e-3), 1e-9);
  EXPECT_EQ(ax.bin_hz.front(), -32 * ax.freq_resolution);
}

TEST(DopplerAxis, DoublingKHalvesResolution) {
  const DopplerAxis a = doppler_axis(64, 0.27e-3, 60e9);
  const DopplerAxis b = doppler_axis(128, 0.27e-3, 60e9);
  EXPECT_NEAR(b.speed_resolution, a.speed_resolution / 2, 1e-12);
  EXPECT_NEAR(b.max_speed, a.max_speed, 1e-12);
  EXPECT_THROW(doppler_axis(0, 1e-3, 1e9), ConfigError);
}

TEST(DopplerAxis, FftshiftRows) {
  EXPECT_EQ(fftshift_row(0, 64), 32);
  EXPECT_EQ(fftshift_row(32, 64), 0);
  EXPECT_EQ(fftshift_row(63, 64), 31);
}
