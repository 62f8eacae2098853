#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace star;
using namespace star::testing;

namespace {

// Direct SSIM from raw sums, written independently of the library code.
double ssim_oracle(const RealMatrix& x, const RealMatrix& y) {
  const double c1 = 1e-4, c2 = 9e-4;
  const int win = 8;
  auto window = [&](int r0, int c0, int h, int w) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int r = r0; r < r0 + h; ++r)
      for (int c = c0; c < c0 + w; ++c) {
        sx += x(r, c);
        sy += y(r, c);
        sxx += x(r, c) * x(r, c);
        syy += y(r, c) * y(r, c);
        sxy += x(r, c) * y(r, c);
      }
    const double n = h * w;
    const double mx = sx / n, my = sy / n;
    const double vx = sxx / n - mx * mx, vy = syy / n - my * my, cxy = sxy / n - mx * my;
    return (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  };
  const int rows = static_cast<int>(x.rows()), cols = static_cast<int>(x.cols());
  if (rows < win || cols < win) return window(0, 0, rows, cols);
  double total = 0;
  int count = 0;
  for (int r = 0; r + win <= rows; ++r)
    for (int c = 0; c + win <= cols; ++c) {
      total += window(r, c, win, win);
      ++count;
    }
  return total / count;
}

RealMatrix random_image(int r, int c, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return RealMatrix::NullaryExpr(r, c, [&] { return u(rng); });
}

std::vector<CirSequence> test_sequences(int n, int windows) {
  std::vector<CirSequence> out;
  for (int i = 0; i < n; ++i) {
    SynthConfig c;
    c.window_len = 16;
    c.window_shift = 8;
    c.max_scatterers = 2;
    c.seed = 500 + static_cast<std::uint64_t>(i);
    out.push_back(synth_sequence(c, windows));
  }
  return out;
}

SweepOptions small_sweep() {
  SweepOptions o;
  o.window_len = 16;
  o.window_shift = 8;
  o.iht.sparsity = 3;
  o.fractions = {0.0, 0.5, 0.8};
  o.timing = false;
  return o;
}

ModelParams small_model() {
  Hyper h;
  h.window_len = 16;
  h.sparsity = 3;
  h.past = 3;
  return param_init(h, 1);
}

}  // namespace

TEST(Rmse, Cases) {
  Rng rng(1);
  const RealMatrix a = random_image(5, 7, rng);
  EXPECT_EQ(rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(rmse(RealMatrix::Ones(4, 4), RealMatrix::Zero(4, 4)), 1.0);
  EXPECT_THROW(rmse(RealMatrix::Zero(2, 3), RealMatrix::Zero(3, 2)), ConfigError);
  RealMatrix b = RealMatrix::Zero(2, 2);
  b(0, 0) = 2.0;
  EXPECT_DOUBLE_EQ(rmse(b, RealMatrix::Zero(2, 2)), 1.0);
}

TEST(Rmse, SpectraMatchImage) {
  std::vector<Spectrum> s{Spectrum::Constant(3, 0.5), Spectrum::Zero(3)};
  std::vector<Spectrum> t{Spectrum::Zero(3), Spectrum::Zero(3)};
  EXPECT_DOUBLE_EQ(rmse(s, t), std::sqrt(0.125));
  EXPECT_EQ(to_image(s).rows(), 3);
  EXPECT_EQ(to_image(s).cols(), 2);
}

TEST(Ssim, IdenticalIsOne) {
  Rng rng(2);
  const RealMatrix a = random_image(16, 20, rng);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, InvertedBinaryToyIsNegative) {
  RealMatrix gt(2, 2);
  gt << 1, 0, 0, 1;
  const RealMatrix inv = RealMatrix::Ones(2, 2) - gt;
  const double expect = (2 * 0.25 + 1e-4) * (-0.5 + 9e-4) / ((0.5 + 1e-4) * (0.5 + 9e-4));
  EXPECT_NEAR(ssim(inv, gt), expect, 1e-12);
  EXPECT_LT(ssim(inv, gt), 0.0);
}

TEST(Ssim, MatchesDirectOracleProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = random_int(2, 20, rng), c = random_int(2, 20, rng);
    const RealMatrix a = random_image(r, c, rng), b = random_image(r, c, rng);
    ASSERT_NEAR(ssim(a, b), ssim_oracle(a, b), 1e-10) << r << "x" << c;
  }
}

TEST(Ssim, ShiftedStructureKeepsContrastTerms) {
  // Adding the same constant to both images changes only the luminance term.
  Rng rng(4);
  const RealMatrix a = 0.5 * random_image(8, 8, rng), b = 0.5 * random_image(8, 8, rng);
  const RealMatrix a2 = a.array() + 0.3, b2 = b.array() + 0.3;
  auto cs = [](const RealMatrix& x, const RealMatrix& y) {
    const double n = static_cast<double>(x.size());
    const double mx = x.mean(), my = y.mean();
    const double vx = (x.array() - mx).square().sum() / n, vy = (y.array() - my).square().sum() / n;
    const double cxy = ((x.array() - mx) * (y.array() - my)).sum() / n;
    return (2 * cxy + 9e-4) / (vx + vy + 9e-4);
  };
  EXPECT_NEAR(cs(a, b), cs(a2, b2), 1e-12);
  EXPECT_NE(ssim(a, b), ssim(a2, b2));
}

TEST(Ssim, ShapeErrors) {
  EXPECT_THROW(ssim(RealMatrix::Zero(2, 3), RealMatrix::Zero(3, 2)), ConfigError);
  EXPECT_THROW(ssim(RealMatrix(), RealMatrix()), ConfigError);
}

TEST(Overhead, DefaultArithmetic) {
  const OverheadParams p;
  EXPECT_EQ(packet_symbols(p), 4352 + 20165);
  EXPECT_NEAR(overhead_estimate(16), 16.0 * 768 / (10.0 * 24517), 1e-15);
  EXPECT_LT(overhead_estimate(7) / overhead_estimate(16), 0.5);
  EXPECT_EQ(overhead_estimate(0), 0.0);
  EXPECT_NE(overhead_assumptions(p).find("packet_symbols=24517"), std::string::npos);
}

TEST(Overhead, LinearInSamples) {
  for (int m = 1; m < 64; ++m) EXPECT_NEAR(overhead_estimate(2 * m), 2 * overhead_estimate(m), 1e-15);
}

TEST(Overhead, RejectsBadParams) {
  OverheadParams p;
  p.bits_per_symbol = 0;
  EXPECT_THROW(overhead_estimate(4, p), ConfigError);
  EXPECT_THROW(overhead_estimate(-1), ConfigError);
}

TEST(Writers, CsvIsFftshifted) {
  Spectrum s = Spectrum::Zero(4);
  s << 0, 1, 2, 3;  // DFT order: bins 0, 1, -2, -1
  const std::string csv = spectrogram_csv({s});
  EXPECT_EQ(csv, "window,bin_-2,bin_-1,bin_0,bin_1\n0,2,3,0,1\n");
}

TEST(Writers, PgmLayout) {
  Spectrum a(4), b(4);
  a << 0, 1, 2, 4;
  b << 4, 4, 4, 4;
  const auto pgm = spectrogram_pgm({a, b});
  const std::string header = "P5\n2 4\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 8);
  EXPECT_EQ(std::string(pgm.begin(), pgm.begin() + static_cast<std::ptrdiff_t>(header.size())), header);
  // Row 0 is bin -2 (DFT index 2): a = 2/4 -> 128, b = 255.
  EXPECT_EQ(pgm[header.size()], 128);
  EXPECT_EQ(pgm[header.size() + 1], 255);
  EXPECT_EQ(pgm[header.size() + 4], 0);  // bin 0 of a
}

TEST(Writers, ClipUnit) {
  Spectrum s(3);
  s << -1, 0.5, 2;
  Spectrum e(3);
  e << 0, 0.5, 1;
  EXPECT_EQ(clip_unit({s}).front(), e);
}

TEST(Sweep, RowsAndReferenceFloor) {
  const auto test = test_sequences(4, 12);
  SweepOptions o = small_sweep();
  o.methods = {"star", "iht-1", "iht", "omp", "ista"};
  const SweepResult r = sweep_missing(test, o, {{"star", small_model()}});
  EXPECT_EQ(r.rows.size(), 15u);
  // With nothing missing every classical solver reproduces its own reference, up to the
  // stopping tolerance (the sweep input is power-normalized, the reference is not).
  EXPECT_LT(r.find("iht", 0.0).rmse, 1e-5);
  EXPECT_LT(r.find("omp", 0.0).rmse, 1e-12);
  EXPECT_LT(r.find("ista", 0.0).rmse, 1e-5);
  EXPECT_NEAR(r.find("iht", 0.0).ssim, 1.0, 1e-4);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.n_windows, 4 * 12);
    EXPECT_GE(row.rmse_stderr, 0.0);
    EXPECT_EQ(row.median_ms_per_window, 0.0);
  }
  EXPECT_THROW(r.find("iht", 0.3), ConfigError);
}

TEST(Sweep, ThreadCountDoesNotChangeScores) {
  const auto test = test_sequences(5, 10);
  SweepOptions o = small_sweep();
  o.methods = {"star", "iht-1", "iht"};
  const auto models = std::map<std::string, ModelParams>{{"star", small_model()}};
  const std::string one = sweep_csv(sweep_missing(test, o, models));
  o.threads = 3;
  EXPECT_EQ(sweep_csv(sweep_missing(test, o, models)), one);
}

TEST(Sweep, StderrIsSampleStdOverRootN) {
  const auto [mean, se] = detail::mean_stderr({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(mean, 2.5);
  EXPECT_NEAR(se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(detail::mean_stderr({7.0}).second, 0.0);
}

TEST(Sweep, Errors) {
  const auto test = test_sequences(1, 4);
  SweepOptions o = small_sweep();
  o.methods = {"star"};
  EXPECT_THROW(sweep_missing(test, o, {}), ConfigError);
  o.methods = {"iht"};
  o.fractions = {1.0};
  EXPECT_THROW(sweep_missing(test, o, {}), ConfigError);
  EXPECT_THROW(sweep_missing({}, small_sweep(), {}), ConfigError);
  o.fractions = {0.5};
  o.methods = {"bogus"};
  EXPECT_THROW(sweep_missing(test, o, {}), std::exception);
}

TEST(Sweep, CsvHeader) {
  SweepResult r;
  r.rows.push_back({"iht", 0.5, 0.1, 0.01, 0.9, 0.02, 10, 0.0});
  EXPECT_EQ(sweep_csv(r),
            "method,missing_fraction,rmse,rmse_stderr,ssim,ssim_stderr,n_windows,median_ms_per_window\n"
            "iht,0.5,0.1,0.01,0.9,0.02,10,0\n");
}

TEST(Bench, ReportsAllTimings) {
  SynthConfig c;
  c.seed = 3;
  const CirSequence seq = synth_sequence(c, 41);
  BenchOptions o;
  o.n_windows = 20;
  o.repeats = 1;
  const BenchResult r = bench_runtime(seq, param_init(64, 1), o);
  EXPECT_GT(r.star_ms, 0.0);
  EXPECT_GT(r.iht_ms, 0.0);
  EXPECT_GE(r.iht_median_iterations, 1.0);
  EXPECT_EQ(r.star_vs_available.size(), 5u);
  EXPECT_GE(r.r_squared, 0.0);
  EXPECT_LE(r.r_squared, 1.0);
}

TEST(Median, EvenAndOdd) {
  EXPECT_EQ(detail::median({3, 1, 2}), 2.0);
  EXPECT_EQ(detail::median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(detail::median({}), 0.0);
}

TEST(ParallelFor, VisitsEachIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  detail::parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(detail::parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
}
