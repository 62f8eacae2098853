#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace star;
using namespace star::testing;
using nlohmann::json;

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const json j = to_json(c);
  EXPECT_EQ(to_json(run_config_from_json(j)), j);
}

TEST(Config, ChangedValuesRoundTrip) {
  RunConfig c;
  c.synth.window_len = 32;
  c.synth.snr_db = std::numeric_limits<double>::infinity();
  c.synth.label = "walk";
  c.n_sequences = 3;
  c.train.lr = 1e-3;
  c.train.hyper.variant = Variant::learn_s;
  c.train.oversample = {{"walk", 2}};
  c.eval.fractions = {0.1, 0.2};
  c.eval.methods = {"iht"};
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(back.synth.window_len, 32);
  EXPECT_TRUE(std::isinf(back.synth.snr_db));
  EXPECT_EQ(back.n_sequences, 3);
  EXPECT_EQ(back.train.hyper.variant, Variant::learn_s);
  EXPECT_EQ(back.train.oversample.at("walk"), 2);
  EXPECT_EQ(back.eval.fractions, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const RunConfig c = run_config_from_json(json::parse(R"({"train": {"epochs": 2}})"));
  EXPECT_EQ(c.train.epochs, 2);
  EXPECT_EQ(c.train.alpha, 0.9);
  EXPECT_EQ(c.synth.window_len, 64);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(run_config_from_json(json::parse(R"({"model": {}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(json::parse(R"({"train": {"learning_rate": 1}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(json::parse(R"({"eval": {"fraction": [0.5]}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(json::parse(R"({"synth": {"K": 64}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(json::parse("[1, 2]")), ConfigError);
}

TEST(Config, UnknownVariantRejected) {
  EXPECT_THROW(run_config_from_json(json::parse(R"({"train": {"variant": "deep"}})")), ConfigError);
}

TEST(Config, LoadErrors) {
  const auto dir = scratch_dir("cfg");
  EXPECT_THROW(load_run_config((dir / "missing.json").string()), ConfigError);
  {
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  EXPECT_THROW(load_run_config((dir / "bad.json").string()), ConfigError);
  {
    std::ofstream(dir / "type.json") << R"({"train": {"epochs": "five"}})";
  }
  EXPECT_THROW(load_run_config((dir / "type.json").string()), ConfigError);
  {
    std::ofstream(dir / "ok.json") << to_json(RunConfig{}).dump();
  }
  EXPECT_EQ(to_json(load_run_config((dir / "ok.json").string())), to_json(RunConfig{}));
  std::filesystem::remove_all(dir);
}
