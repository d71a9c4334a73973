#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "dpagrpo/dpagrpo.h"

namespace {

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(dpa_status_name(DPA_OK), "ok");
  EXPECT_STRNE(dpa_status_name(DPA_ERR_CONFIG), dpa_status_name(DPA_ERR_NUMERIC));
  EXPECT_NE(std::string(dpa_version()), "");
}

TEST(CApi, ConfigSetGetAndBufferSizes) {
  dpa_config* c = nullptr;
  ASSERT_EQ(dpa_config_create(&c), DPA_OK);
  EXPECT_EQ(dpa_config_set(c, "train.beta_v", "0.25"), DPA_OK);
  size_t required = 0;
  EXPECT_EQ(dpa_config_get(c, "train.beta_v", nullptr, 0, &required), DPA_OK);
  EXPECT_EQ(required, 5u);
  char small[3];
  EXPECT_EQ(dpa_config_get(c, "train.beta_v", small, sizeof small, nullptr), DPA_ERR_INVALID_ARGUMENT);
  char buf[16];
  EXPECT_EQ(dpa_config_get(c, "train.beta_v", buf, sizeof buf, nullptr), DPA_OK);
  EXPECT_STREQ(buf, "0.25");
  EXPECT_EQ(dpa_config_set(c, "train.nope", "1"), DPA_ERR_CONFIG);
  EXPECT_NE(std::string(dpa_last_error()).find("train.nope"), std::string::npos);
  EXPECT_EQ(dpa_config_has_key("env.seed"), 1);
  EXPECT_EQ(dpa_config_has_key("env.nope"), 0);
  EXPECT_EQ(dpa_config_load_text(c, "[train]\nmax_steps = 3\n"), DPA_OK);
  EXPECT_EQ(dpa_config_load_file(c, "/nonexistent.cfg"), DPA_ERR_CONFIG);
  dpa_config_destroy(c);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(dpa_config_create(nullptr), DPA_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(dpa_run(nullptr), DPA_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(dpa_group_advantage(nullptr, 2, 0.0, 0, nullptr), DPA_ERR_INVALID_ARGUMENT);
  dpa_config_destroy(nullptr);
  dpa_corpus_destroy(nullptr);
}

TEST(CApi, CorpusGenerateSaveLoad) {
  dpa_corpus* a = nullptr;
  ASSERT_EQ(dpa_corpus_generate(nullptr, 7, 4, &a), DPA_OK);
  EXPECT_EQ(dpa_corpus_size(a), 4u);
  size_t horizon = 0;
  ASSERT_EQ(dpa_corpus_horizon(a, 0, &horizon), DPA_OK);
  EXPECT_GE(horizon, 1u);
  int64_t value = 0;
  EXPECT_EQ(dpa_corpus_oracle_value(a, 0, 1, &value), DPA_OK);
  EXPECT_EQ(dpa_corpus_oracle_value(a, 0, 0, &value), DPA_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(dpa_corpus_oracle_value(a, 9, 1, &value), DPA_ERR_INVALID_ARGUMENT);
  const std::string path = (std::filesystem::temp_directory_path() / "dpa_capi_corpus.jsonl").string();
  ASSERT_EQ(dpa_corpus_save(a, path.c_str()), DPA_OK);
  dpa_corpus* b = nullptr;
  ASSERT_EQ(dpa_corpus_load(path.c_str(), &b), DPA_OK);
  EXPECT_EQ(dpa_corpus_size(b), 4u);
  int64_t other = 0;
  EXPECT_EQ(dpa_corpus_oracle_value(b, 0, 1, &other), DPA_OK);
  EXPECT_EQ(value, other);
  dpa_corpus_destroy(a);
  dpa_corpus_destroy(b);
  std::filesystem::remove(path);
}

TEST(CApi, NumericHelpers) {
  const double r[2] = {1.0, 0.0};
  double adv[2];
  ASSERT_EQ(dpa_group_advantage(r, 2, 1e-6, 0, adv), DPA_OK);
  EXPECT_NEAR(adv[0], 0.999998, 1e-6);
  EXPECT_EQ(adv[0], -adv[1]);
  dpa_case c;
  ASSERT_EQ(dpa_classify_case(0, DPA_SAC, DPA_KEEP, 0, &c), DPA_OK);
  EXPECT_EQ(c, DPA_C6A);
  ASSERT_EQ(dpa_classify_case(0, DPA_SAC, DPA_REVISE, 1, &c), DPA_OK);
  EXPECT_EQ(c, DPA_C5A);
  EXPECT_EQ(dpa_classify_case(0, DPA_SAC, DPA_REVISE, -1, &c), DPA_ERR_INVALID_ARGUMENT);
  double lo = 0, hi = 0;
  ASSERT_EQ(dpa_wilson_interval(10, 20, &lo, &hi), DPA_OK);
  EXPECT_NEAR(lo, 0.299, 1e-3);
  const double ref[2] = {0.5, 0.5}, rew[2] = {0.08, 0.0};
  double pi[2];
  ASSERT_EQ(dpa_kl_best_response(ref, rew, 2, 0.04, pi), DPA_OK);
  EXPECT_NEAR(pi[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
}

}  // namespace
