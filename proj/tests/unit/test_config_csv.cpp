#include <gtest/gtest.h>

#include <string>

#include "parafrac/config.hpp"
#include "parafrac/csv.hpp"
#include "parafrac/errors.hpp"

namespace parafrac {
namespace {

TEST(Seed, DecimalAndHex) {
  EXPECT_EQ(parse_seed("42"), 42U);
  EXPECT_EQ(parse_seed("0x2a"), 42U);
  EXPECT_EQ(parse_seed("0X2A"), 42U);
  EXPECT_EQ(parse_seed("18446744073709551615"), 18446744073709551615ULL);
  EXPECT_THROW(parse_seed(""), Error);
  EXPECT_THROW(parse_seed("-1"), Error);
  EXPECT_THROW(parse_seed("12abc"), Error);
  EXPECT_THROW(parse_seed("18446744073709551616"), Error);
}

TEST(Levels, RangeAndList) {
  EXPECT_EQ(parse_levels("2..5"), (std::vector<int>{2, 3, 4, 5}));
  EXPECT_EQ(parse_levels("1, 3,7"), (std::vector<int>{1, 3, 7}));
  EXPECT_THROW(parse_levels("5..2"), Error);
  EXPECT_THROW(parse_levels("a"), Error);
}

TEST(Fnv, KnownAnswers) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, ParsesSectionsAndComments) {
  const auto c = parse_config(R"(
# comment
[experiment]
kind = range_dim   ; trailing comment
replicas = 3
seed = 0x10

[process]
alpha = 1.5
d = 2

[time_set]
kind = cantor
level = 10

[estimate]
levels = 2..9
)");
  EXPECT_EQ(c.kind, ExperimentKind::range_dim);
  EXPECT_EQ(c.replicas, 3U);
  EXPECT_EQ(c.seed, 16U);
  EXPECT_DOUBLE_EQ(c.process.alpha, 1.5);
  EXPECT_EQ(c.process.d, 2);
  EXPECT_EQ(c.time_set.kind, TimeSetKind::cantor);
  EXPECT_EQ(c.levels.size(), 8U);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(parse_config("[experiment]\nkindd = graph_dim\n"), ValidationError);
  EXPECT_THROW(parse_config("[nosuch]\nx = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("[experiment]\nkind = graph_dim\nkind = range_dim\n"), ValidationError);
  EXPECT_THROW(parse_config("[experiment]\nkind = bogus\n"), ValidationError);
  EXPECT_THROW(parse_config("[process]\nalpha = abc\n"), ValidationError);
  EXPECT_THROW(parse_config("alpha = 1\n"), ValidationError);
}

TEST(Config, ErrorNamesKey) {
  try {
    parse_config("[process]\nalpah = 1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key(), "process.alpah");
  }
}

TEST(Config, CanonicalRoundTripAndHash) {
  ExperimentConfig c;
  c.kind = ExperimentKind::energy_threshold;
  c.energy.betas = {0.5, 0.75, 1.0, 1.25, 1.5};
  c.seed = 99;
  const auto back = parse_config(c.canonical());
  EXPECT_EQ(back.canonical(), c.canonical());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(c.hash().size(), 16U);
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.threads = 7;
  b.out_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, ValidationCoupling) {
  ExperimentConfig c;
  c.time_set.level = 12;
  c.levels = parse_levels("2..11");
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key(), "estimate.levels");
  }
  c.levels = parse_levels("2..10");
  EXPECT_NO_THROW(c.validate());
  c.levels = parse_levels("2..8");
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Config, ValidationOfOtherKinds) {
  ExperimentConfig e;
  e.kind = ExperimentKind::energy_threshold;
  e.energy.betas = {1.0, 0.5, 1.5, 2.0, 2.5};
  EXPECT_THROW(e.validate(), ValidationError);
  e.energy.betas = {0.5, 1.0, 1.5, 2.0, 2.5};
  EXPECT_NO_THROW(e.validate());

  ExperimentConfig k;
  k.kind = ExperimentKind::kernel_sweep;
  k.kernel.scales = {2, 3};
  EXPECT_THROW(k.validate(), ValidationError);

  ExperimentConfig p;
  p.process.alpha = 3.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.0}) {
    EXPECT_EQ(std::stod(csv_number(v)), v);
  }
  EXPECT_EQ(csv_number(1.5), "1.5");
  EXPECT_EQ(csv_number(2.0), "2");
}

TEST(Csv, EscapingAndParsing) {
  CsvTable t({"a", "b"});
  t.add_row({"x,y", "say \"hi\""});
  t.add_row({"plain", ""});
  const std::string text = t.to_csv();
  EXPECT_EQ(text, "a,b\n\"x,y\",\"say \"\"hi\"\"\"\nplain,\n");
  const auto back = CsvTable::parse(text);
  EXPECT_EQ(back.header(), t.header());
  EXPECT_EQ(back.rows(), t.rows());
  EXPECT_THROW(t.add_row({"only one"}), ParameterError);
  EXPECT_THROW(t.column("c"), InputError);
  EXPECT_EQ(t.column("b"), 1U);
}

TEST(Csv, LineEndingsAreLf) {
  CsvTable t({"k"});
  t.add_row({"1"});
  EXPECT_EQ(t.to_csv().find('\r'), std::string::npos);
}

}  // namespace
}  // namespace parafrac
