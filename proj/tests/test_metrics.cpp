#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "detvlm/errors.hpp"
#include "detvlm/metrics/clipscore.hpp"
#include "detvlm/metrics/metrics.hpp"
#include "support/fixtures.hpp"

using namespace detvlm;
using namespace detvlm::metrics;
using parsing::CountAnswer;
using parsing::CountQualifier;
using parsing::Undefined;
using parsing::UndefinedReason;

TEST(Mae, CountsOnlyAnsweredRecords) {
  const std::vector<CountRecord> recs{{"a", CountAnswer{10, CountQualifier::Exact}, 12},
                                      {"b", CountAnswer{13, CountQualifier::AtLeast}, 14},
                                      {"c", Undefined{UndefinedReason::Refusal}, 5}};
  const auto r = mae(recs);
  ASSERT_TRUE(r.defined());
  EXPECT_DOUBLE_EQ(*r.mae, 1.5);
  EXPECT_EQ(r.n_answered, 2u);
  EXPECT_EQ(r.n_undefined, 1u);
}

TEST(Mae, AllUndefinedIsUndefined) {
  const std::vector<CountRecord> recs{{"a", Undefined{}, 3}};
  EXPECT_FALSE(mae(recs).defined());
  EXPECT_FALSE(mae({}).defined());
}

TEST(Mae, ShiftProperty) {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> d(0, 50), k(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const int off = k(rng);
    std::vector<CountRecord> recs;
    for (int i = 0; i < 10; ++i) {
      const int truth = d(rng) + 5;
      recs.push_back({"x", CountAnswer{truth + off, CountQualifier::Exact}, truth});
    }
    EXPECT_DOUBLE_EQ(*mae(recs).mae, std::abs(off));
  }
}

TEST(Improvement, Formulas) {
  EXPECT_DOUBLE_EQ(improvement_pct(10.0, 5.0), 50.0);
  EXPECT_DOUBLE_EQ(improvement_pct(10.0, 15.0), -50.0);
  EXPECT_DOUBLE_EQ(gain_pct(10.0, 15.0), 50.0);
  EXPECT_THROW(improvement_pct(0.0, 1.0), MetricError);
  EXPECT_THROW(gain_pct(-1.0, 1.0), MetricError);
  EXPECT_THROW(average_improvement({}), MetricError);
  const std::vector<double> cells{1.0, 2.0, 6.0};
  EXPECT_DOUBLE_EQ(average_improvement(cells), 3.0);
}

TEST(Improvement, RoundingIsHalfAwayFromZero) {
  EXPECT_EQ(round_half_away(2.125), 2.13);
  EXPECT_EQ(round_half_away(-2.125), -2.13);
  EXPECT_EQ(round_half_away(50.5501), 50.55);
  EXPECT_EQ(round_half_away(1.005), 1.01);
  EXPECT_EQ(round_half_away(7.0, 0), 7.0);
}

TEST(Clip, ScoreAndClamp) {
  const EmbeddingVector a({1.0, 0.0}), b({1.0, 0.0}), c({-1.0, 0.0}), d({0.0, 2.0});
  EXPECT_DOUBLE_EQ(clip_score(a, b), 100.0);
  EXPECT_DOUBLE_EQ(clip_score(a, c), 0.0);
  EXPECT_DOUBLE_EQ(clip_score(a, d), 0.0);
  EXPECT_DOUBLE_EQ(clip_score(a, EmbeddingVector({1.0, 1.0})), 100.0 * std::sqrt(0.5));
  EXPECT_THROW(cosine(a, EmbeddingVector({1.0, 2.0, 3.0})), MetricError);
  EXPECT_THROW(cosine(a, EmbeddingVector({0.0, 0.0})), MetricError);
  EXPECT_THROW(EmbeddingVector({}), EmbeddingError);
}

TEST(Clip, ScoreIsBoundedForRandomVectors) {
  std::mt19937 rng(8);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(16), y(16);
    for (auto& v : x) v = n(rng);
    for (auto& v : y) v = n(rng);
    const double s = clip_score(EmbeddingVector(x), EmbeddingVector(y));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 100.0 + 1e-9);
  }
}

TEST(Clip, StubProviderIsDeterministicUnitLength) {
  StubEmbeddingProvider p(4, 64), q(4, 64), other(5, 64);
  const std::vector<std::uint8_t> bytes{1, 2, 3};
  const auto v = p.embed(EmbeddingItem::image("img", bytes));
  EXPECT_EQ(v, q.embed(EmbeddingItem::image("img", bytes)));
  EXPECT_NE(v, other.embed(EmbeddingItem::image("img", bytes)));
  EXPECT_NE(p.embed(EmbeddingItem::text("a")), p.embed(EmbeddingItem::text("b")));
  EXPECT_EQ(v.dimension(), 64u);
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
}

TEST(Clip, FileProvider) {
  testsupport::TempDir dir;
  const auto text_id = EmbeddingItem::text("a plane").id;
  testsupport::write_text(dir / "e.json", "{\"img\": [1, 0], \"" + text_id + "\": [1, 1]}");
  FileEmbeddingProvider p(dir / "e.json");
  const std::vector<std::uint8_t> none{0};
  EXPECT_EQ(p.embed(EmbeddingItem::image("img", none)), EmbeddingVector({1.0, 0.0}));
  EXPECT_EQ(p.embed(EmbeddingItem::text("a plane")), EmbeddingVector({1.0, 1.0}));
  EXPECT_THROW(p.embed(EmbeddingItem::text("missing")), EmbeddingError);
  testsupport::write_text(dir / "bad.json", "{\"a\": [1, 0], \"b\": [1, 0, 0]}");
  EXPECT_THROW(FileEmbeddingProvider(dir / "bad.json"), EmbeddingError);
}
