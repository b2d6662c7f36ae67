#include <gtest/gtest.h>

#include <vector>

#include "forumsim/errors.hpp"
#include "forumsim/rational.hpp"
#include "forumsim/rng.hpp"
#include "forumsim/stance.hpp"
#include "forumsim/types.hpp"

using namespace forumsim;

TEST(Stance, FromValueMapsTheFivePointScale) {
  EXPECT_EQ(stance_from_value(0), Stance::Neutral);
  EXPECT_EQ(stance_from_value(-2), Stance::StronglyOppose);
  EXPECT_EQ(stance_from_value(2), Stance::StronglySupport);
  EXPECT_EQ(label(stance_from_value(-2)), "Strongly Oppose");
  EXPECT_EQ(label(stance_from_value(0)), "Neutral");
}

TEST(Stance, FromValueRejectsOutOfRangeAndNamesTheValue) {
  for (int bad : {3, -3, 100}) {
    try {
      stance_from_value(bad);
      FAIL() << "expected DomainError for " << bad;
    } catch (const DomainError& e) {
      EXPECT_NE(std::string(e.what()).find(std::to_string(bad)), std::string::npos);
    }
  }
}

TEST(Stance, ValueRoundTrips) {
  for (int v = -2; v <= 2; ++v) EXPECT_EQ(value(stance_from_value(v)), v);
}

TEST(Stance, LabelsAndNamesArePairedBijectively) {
  for (Stance s : kAllStances) {
    EXPECT_EQ(parse_label(label(s)), s);
    EXPECT_EQ(parse_label(name(s)), s);
  }
  EXPECT_EQ(parse_label("strongly_support"), Stance::StronglySupport);
  EXPECT_EQ(parse_label("STRONGLY SUPPORT"), Stance::StronglySupport);
  EXPECT_EQ(parse_label("strongly-oppose"), Stance::StronglyOppose);
  EXPECT_FALSE(parse_label("agree"));
  EXPECT_FALSE(parse_label("support!"));
}

TEST(Stance, DistanceExamples) {
  EXPECT_EQ(stance_distance(Stance::StronglyOppose, Stance::StronglySupport), 4);
  EXPECT_EQ(stance_distance(Stance::Support, Stance::Support), 0);
  EXPECT_EQ(stance_distance(Stance::Oppose, Stance::Support), 2);
}

TEST(Stance, DistanceIsAMetricByExhaustion) {
  for (Stance a : kAllStances) {
    for (Stance b : kAllStances) {
      EXPECT_EQ(stance_distance(a, b), stance_distance(b, a));
      EXPECT_EQ(stance_distance(a, b) == 0, a == b);
      for (Stance c : kAllStances) {
        EXPECT_LE(stance_distance(a, c), stance_distance(a, b) + stance_distance(b, c));
      }
    }
  }
}

TEST(Distribution, AllNeutral) {
  const std::vector<Stance> s(6, Stance::Neutral);
  const auto d = distribution_from_stances(s);
  EXPECT_EQ(d.proportion(Stance::Neutral), Rational(1));
  for (Stance other : {Stance::StronglyOppose, Stance::Oppose, Stance::Support, Stance::StronglySupport}) {
    EXPECT_EQ(d.proportion(other), Rational(0));
  }
}

TEST(Distribution, OneOfEachPlusSecondNeutral) {
  const std::vector<Stance> s = {Stance::StronglyOppose, Stance::Oppose, Stance::Neutral,
                                 Stance::Neutral,        Stance::Support, Stance::StronglySupport};
  const auto d = distribution_from_stances(s);
  EXPECT_EQ(d.proportion(Stance::StronglyOppose), Rational(1, 6));
  EXPECT_EQ(d.proportion(Stance::Oppose), Rational(1, 6));
  EXPECT_EQ(d.proportion(Stance::Neutral), Rational(2, 6));
  EXPECT_EQ(d.proportion(Stance::Support), Rational(1, 6));
  EXPECT_EQ(d.proportion(Stance::StronglySupport), Rational(1, 6));
}

TEST(Distribution, AllStronglySupport) {
  const std::vector<Stance> s(3, Stance::StronglySupport);
  EXPECT_EQ(distribution_from_stances(s).proportion(Stance::StronglySupport), Rational(1));
}

TEST(Distribution, EmptyListIsADomainError) {
  EXPECT_THROW(distribution_from_stances({}), DomainError);
}

TEST(Distribution, ProportionsSumToOneExactly) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Stance> s(1 + rng.uniform(40));
    for (auto& x : s) x = kAllStances[rng.uniform(5)];
    Rational sum(0);
    for (const auto& p : distribution_from_stances(s).proportions()) sum += p;
    EXPECT_EQ(sum, Rational(1));
  }
}

TEST(Decimal, RoundHalfEvenAtFourPlaces) {
  EXPECT_EQ(format_decimal(Rational(1, 3)), "0.3333");
  EXPECT_EQ(format_decimal(Rational(2, 3)), "0.6667");
  EXPECT_EQ(format_decimal(Rational(1, 1)), "1.0000");
  EXPECT_EQ(format_decimal(Rational(-1, 6)), "-0.1667");
  EXPECT_EQ(format_decimal(Rational(1, 20000)), "0.0000");   // 0.00005 -> even
  EXPECT_EQ(format_decimal(Rational(3, 20000)), "0.0002");   // 0.00015 -> even
  EXPECT_EQ(format_decimal(Rational(5, 20000)), "0.0002");   // 0.00025 -> even
  EXPECT_EQ(format_decimal(Rational(-1, 20000)), "0.0000");
  EXPECT_EQ(format_decimal(Rational(7, 10)), "0.7000");
}

TEST(Rng, SplitMixMatchesReferenceOutputs) {
  // First outputs of the reference SplitMix64 with seed 0 (Vigna's splitmix64.c).
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
}

TEST(Rng, UniformStaysInRange) {
  SplitMix64 rng(42);
  std::array<int, 5> hits{};
  for (int i = 0; i < 10000; ++i) ++hits[rng.uniform(5)];
  for (int h : hits) EXPECT_GT(h, 1500);
}
