#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace star;
using namespace star::testing;

namespace {

CirSequence sample_sequence() {
  SynthConfig c;
  c.seed = 17;
  c.label = "walk";
  CirSequence s = synth_sequence(c, 3);
  Rng rng(2);
  return with_grid_mask(s, gen_grid_mask(s.size(), 64, 32, 0.5, rng));
}

}  // namespace

TEST(CirIo, BinaryRoundTripIsBitExact) {
  const CirSequence s = sample_sequence();
  const CirSequence back = decode_cir(encode_cir(s));
  EXPECT_EQ(back.samples, s.samples);
  EXPECT_EQ(back.grid_mask, s.grid_mask);
  EXPECT_EQ(back.meta.config.seed, 17u);
  EXPECT_EQ(back.meta.config.label, "walk");
  ASSERT_EQ(back.meta.truth.size(), s.meta.truth.size());
  EXPECT_EQ(back.meta.truth[1].freqs_hz, s.meta.truth[1].freqs_hz);
  EXPECT_EQ(back.meta.truth[1].amplitudes, s.meta.truth[1].amplitudes);
}

TEST(CirIo, FileRoundTrip) {
  const auto dir = scratch_dir("cir");
  const CirSequence s = sample_sequence();
  save_cir((dir / "a.cir").string(), s);
  const CirSequence back = load_cir((dir / "a.cir").string());
  EXPECT_EQ(back.samples, s.samples);
  std::filesystem::remove_all(dir);
}

TEST(CirIo, InfiniteSnrSurvives) {
  SynthConfig c;
  c.snr_db = std::numeric_limits<double>::infinity();
  const CirSequence back = decode_cir(encode_cir(synth_sequence(c, 1)));
  EXPECT_TRUE(std::isinf(back.meta.config.snr_db));
}

TEST(CirIo, TruncationIsAnErrorAtEveryLength) {
  const auto bytes = encode_cir(sample_sequence());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, std::size_t{24}, bytes.size() / 2,
                          bytes.size() - 1}) {
    std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_cir(b), FormatError) << "cut at " << cut;
  }
}

TEST(CirIo, BadMagicReportsOffsetZero) {
  auto bytes = encode_cir(sample_sequence());
  bytes[0] = 'X';
  try {
    decode_cir(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(CirIo, TrailingBytesRejected) {
  auto bytes = encode_cir(sample_sequence());
  bytes.push_back(0);
  EXPECT_THROW(decode_cir(bytes), FormatError);
}

TEST(CirIo, BadMaskByteRejected) {
  const CirSequence s = sample_sequence();
  auto bytes = encode_cir(s);
  const std::size_t mask_start = 4 + 4 + 8 + 8 + static_cast<std::size_t>(s.size()) * 16;
  bytes[mask_start] = 7;
  try {
    decode_cir(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), mask_start);
  }
}

TEST(CirIo, CsvWithMask) {
  const auto dir = scratch_dir("csv");
  const auto path = (dir / "in.csv").string();
  {
    std::ofstream out(path);
    out << "index,real,imag,mask\n0,1.5,-2,1\n1,0,0,0\n2,3,4,1\n";
  }
  int warnings = 0;
  const CirSequence s = load_cir(path, [&](const std::string&) { ++warnings; });
  EXPECT_EQ(warnings, 0);
  ASSERT_EQ(s.size(), 3);
  EXPECT_EQ(s.samples[0], cdouble(1.5, -2.0));
  EXPECT_EQ(s.grid_mask, (Mask{true, false, true}));
  std::filesystem::remove_all(dir);
}

TEST(CirIo, CsvWithoutMaskWarnsAndAssumesAvailable) {
  const auto dir = scratch_dir("csv2");
  const auto path = (dir / "in.csv").string();
  {
    std::ofstream out(path);
    out << "index,real,imag\n0,1,2\n1,3,4\n";
  }
  std::vector<std::string> warnings;
  const CirSequence s = load_cir(path, [&](const std::string& m) { warnings.push_back(m); });
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(s.grid_mask, (Mask{true, true}));
  std::filesystem::remove_all(dir);
}

TEST(CirIo, CsvErrorsCarryLineOffset) {
  const auto dir = scratch_dir("csv3");
  const auto path = (dir / "in.csv").string();
  {
    std::ofstream out(path);
    out << "index,real,imag\n0,1,2\n1,x,4\n";
  }
  try {
    load_cir(path, [](const std::string&) {});
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), std::string("index,real,imag\n0,1,2\n").size());
  }
  {
    std::ofstream out(path);
    out << "a,b\n";
  }
  EXPECT_THROW(load_cir(path, [](const std::string&) {}), FormatError);
  std::filesystem::remove_all(dir);
}
