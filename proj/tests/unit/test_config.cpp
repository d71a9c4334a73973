#include <gtest/gtest.h>

#include <functional>

#include "common/errors.hpp"
#include "experiment/config.hpp"

namespace dpa::experiment {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Config, DefaultsFromSchema) {
  const Config c;
  for (const KeySpec& k : config_schema()) EXPECT_EQ(c.get(k.key), k.default_value) << k.key;
  EXPECT_EQ(c.get_seeds("run.seeds"), (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_TRUE(c.get_bool("eval.greedy"));
}

TEST(Config, SectionsCommentsAndOverrides) {
  Config c;
  c.load_text("# comment\n[train]\nbeta_v = 0.1   # trailing\nmax_steps=7\n\n[run]\nseeds = 3, 4\n");
  EXPECT_DOUBLE_EQ(c.get_double("train.beta_v"), 0.1);
  EXPECT_EQ(c.get_uint("train.max_steps"), 7u);
  EXPECT_EQ(c.get_seeds("run.seeds"), (std::vector<std::uint64_t>{3, 4}));
}

TEST(Config, RejectsUnknownAndIllTyped) {
  Config c;
  EXPECT_EQ(code_of([&] { c.set("train.bogus", "1"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { c.set("train.max_steps", "-3"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { c.set("train.beta_v", "abc"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { c.set("run.command", "dance"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { c.set("eval.greedy", "maybe"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { c.load_text("no equals sign\n"); }), ErrorCode::kConfig);
}

TEST(Config, TextRoundTripAndHash) {
  Config a;
  a.set("train.beta_v", "0.2");
  a.set("run.out_dir", "x");
  Config b;
  b.load_text(a.to_text());
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_EQ(a.hash(), b.hash());
  b.set("run.out_dir", "elsewhere");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("train.beta_v", "0.3");
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Resolve, TypedView) {
  Config c;
  c.set("run.threads", "3");
  c.set("env.num_distractors", "4");
  c.set("train.schedule", "robbins_monro");
  const ExperimentConfig x = resolve(c);
  EXPECT_EQ(x.threads, 3u);
  EXPECT_EQ(x.train.threads, 3u);
  EXPECT_EQ(x.eval.threads, 3u);
  EXPECT_EQ(x.features.num_slots, 5u);
  EXPECT_EQ(x.train.schedule.kind, train::StepSchedule::Kind::kRobbinsMonro);
}

TEST(Resolve, CrossKeyValidation) {
  Config c;
  c.set("env.min_lines", "9");
  EXPECT_EQ(code_of([&] { resolve(c); }), ErrorCode::kConfig);
  Config e;
  e.set("run.command", "eval");
  EXPECT_EQ(code_of([&] { resolve(e); }), ErrorCode::kConfig);
  Config s;
  s.set("env.train_fraction", "1.5");
  EXPECT_EQ(code_of([&] { resolve(s); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace dpa::experiment
