#include <gtest/gtest.h>

#include <vector>

#include "forumsim/errors.hpp"
#include "forumsim/metrics.hpp"
#include "forumsim/orchestrator.hpp"
#include "metrics_oracle.hpp"
#include "scenarios.hpp"

using namespace forumsim;
using namespace forumsim::testing;

namespace {

constexpr auto SO = Stance::StronglyOppose;
constexpr auto O = Stance::Oppose;
constexpr auto N = Stance::Neutral;
constexpr auto S = Stance::Support;
constexpr auto SS = Stance::StronglySupport;

/// rows[r][a] = stance of agent a in round r + 1.
Transcript transcript_from(const std::vector<std::vector<Stance>>& rows) {
  Transcript t;
  t.trial_id = "t";
  t.topic = test_topic();
  t.rounds_total = static_cast<int>(rows.size());
  for (std::size_t a = 0; a < rows[0].size(); ++a) t.personas.push_back(make_persona("a" + std::to_string(a), rows[0][a]));
  std::uint64_t seq = 1;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t a = 0; a < rows[r].size(); ++a) {
      Post p{"t", static_cast<int>(r) + 1, t.personas[a].id, seq++, "x", rows[r][a], {}, StanceSource::Scripted};
      if (r > 0) p.references = {{static_cast<int>(r), t.personas[0].id}};
      t.posts.push_back(p);
    }
  }
  return t;
}

Transcript random_transcript(SplitMix64& gen) {
  const std::size_t agents = 2 + gen.uniform(7);
  const std::size_t rounds = 2 + gen.uniform(6);
  std::vector<std::vector<Stance>> rows(rounds, std::vector<Stance>(agents));
  for (auto& row : rows)
    for (auto& s : row) s = kAllStances[gen.uniform(5)];
  return transcript_from(rows);
}

Transcript negated(Transcript t) {
  for (auto& p : t.personas) p.initial_stance = negate(p.initial_stance);
  for (auto& p : t.posts) p.declared_stance = negate(p.declared_stance);
  return t;
}

StanceDistribution dist(std::vector<Stance> v) { return distribution_from_stances(v); }

void expect_matches_oracle(const Transcript& t, MajorityScope scope) {
  const auto m = compute_trial_metrics(t, scope);
  const auto o = oracle_metrics(t, scope == MajorityScope::Exclusive);
  ASSERT_EQ(m.opportunities, o.opportunities);
  EXPECT_EQ(m.conforming_count, o.conforming);
  EXPECT_EQ(m.conformity_rate, Rational(o.cr.num, o.cr.den));
  ASSERT_EQ(m.polarization_series.size(), o.p.size());
  for (std::size_t r = 0; r < o.p.size(); ++r) {
    EXPECT_EQ(m.polarization_series[r], Rational(o.p[r].num, o.p[r].den));
    EXPECT_EQ(m.fragmentation_series[r], Rational(o.f[r].num, o.f[r].den));
  }
  EXPECT_EQ(m.delta_p_signed, Rational(o.dp_signed.num, o.dp_signed.den));
  EXPECT_EQ(m.delta_p_abs, Rational(o.dp_abs.num, o.dp_abs.den));
}

}  // namespace

TEST(MajorityStance, Examples) {
  EXPECT_EQ(majority_stance(std::vector{S, S, N, O, SO, S}), S);
  EXPECT_EQ(majority_stance(std::vector{S, S, O, O, N, N}), std::nullopt);
  EXPECT_EQ(majority_stance(std::vector{N}), N);
  EXPECT_THROW(majority_stance(std::vector<Stance>{}), DomainError);
}

TEST(IsConformingChange, Examples) {
  EXPECT_TRUE(is_conforming_change(O, N, S));
  EXPECT_FALSE(is_conforming_change(S, SS, S));
  EXPECT_FALSE(is_conforming_change(S, S, S));
  EXPECT_FALSE(is_conforming_change(SO, SS, std::nullopt));
  // overshooting past the majority but ending closer still counts
  EXPECT_TRUE(is_conforming_change(SO, S, N));
  EXPECT_FALSE(is_conforming_change(O, S, N));
}

TEST(IsConformingChange, DefinitionOverAllTriples) {
  for (Stance a : kAllStances)
    for (Stance b : kAllStances)
      for (Stance m : kAllStances) {
        const bool expected = a != b && std::abs(value(b) - value(m)) < std::abs(value(a) - value(m));
        EXPECT_EQ(is_conforming_change(a, b, m), expected);
      }
}

TEST(ConformityRate, StubbornSixAgentsIsZeroOverTwentyFour) {
  const auto r = conformity_rate(run_trial(stubborn_trial({S, SO, N, O, SS, N})).transcript);
  EXPECT_EQ(r.opportunities, 24);
  EXPECT_EQ(r.conforming_count, 0);
  EXPECT_EQ(r.rate, Rational(0));
  EXPECT_TRUE(r.changes.empty());
}

TEST(ConformityRate, ConformistTrioIsOneThird) {
  const auto r = conformity_rate(run_trial(conformist_trio()).transcript);
  EXPECT_EQ(r.opportunities, 12);
  EXPECT_EQ(r.conforming_count, 4);
  EXPECT_EQ(r.rate, Rational(1, 3));
  ASSERT_EQ(r.changes.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.changes[i].agent, "conformist");
    EXPECT_EQ(r.changes[i].round, static_cast<int>(i) + 2);
    EXPECT_EQ(r.changes[i].majority_at_event, SS);
    EXPECT_TRUE(r.changes[i].conforming);
  }
}

TEST(ConformityRate, MajoritySeenIncludesEarlierPostsOfSameRound) {
  // Round 2: a0 flips to +2 first, so a1 sees {+2, -2(own), +2} and conforms.
  const auto t = transcript_from({{SO, SO, SS}, {SS, O, SS}});
  const auto r = conformity_rate(t);
  EXPECT_EQ(r.conforming_count, 1);
  ASSERT_EQ(r.changes.size(), 2u);
  EXPECT_FALSE(r.changes[0].conforming);  // a0 moved away from the -2 majority
  EXPECT_EQ(r.changes[0].majority_at_event, SO);
  EXPECT_TRUE(r.changes[1].conforming);
}

TEST(ConformityRate, ExclusiveScopeIgnoresOwnStance) {
  // a0 (own -2) with {+1, +1, -2}: inclusive is a 2-2 tie, exclusive gives +1.
  const auto t = transcript_from({{SO, S, S, SO}, {O, S, S, SO}});
  EXPECT_EQ(conformity_rate(t, MajorityScope::Inclusive).conforming_count, 0);
  EXPECT_EQ(conformity_rate(t, MajorityScope::Exclusive).conforming_count, 1);
}

TEST(ConformityRate, IncompleteTranscriptIsDomainError) {
  auto t = run_trial(conformist_trio()).transcript;
  t.posts.pop_back();
  EXPECT_THROW(conformity_rate(t), DomainError);
  EXPECT_THROW(compute_trial_metrics(t), DomainError);
}

TEST(PolarizationIndex, Examples) {
  EXPECT_EQ(polarization_index(dist({N, N, N})), Rational(0));
  EXPECT_EQ(polarization_index(dist({SS, SS})), Rational(2));
  // one agent per non-neutral stance plus two neutral: (2+1+0+0+1+2)/6
  EXPECT_EQ(polarization_index(dist({SO, O, N, N, S, SS})), Rational(1));
}

TEST(PolarizationChange, Examples) {
  const std::vector<Rational> quoted = {Rational(83, 100), Rational(1), Rational(153, 100)};
  const auto c = polarization_change(quoted);
  EXPECT_EQ(c.signed_change, Rational(7, 10));
  EXPECT_EQ(c.abs_change, Rational(7, 10));

  const std::vector<Rational> flat(5, Rational(3, 2));
  EXPECT_EQ(polarization_change(flat), (PolarizationChange{Rational(0), Rational(0)}));

  const std::vector<Rational> falling = {Rational(3, 2), Rational(1), Rational(1, 2)};
  EXPECT_EQ(polarization_change(falling), (PolarizationChange{Rational(-1), Rational(1)}));

  const std::vector<Rational> single = {Rational(1)};
  EXPECT_THROW(polarization_change(single), DomainError);
}

TEST(FragmentationIndex, Examples) {
  EXPECT_EQ(fragmentation_index(dist({SS, N, N, N, SO})), Rational(1));
  EXPECT_EQ(fragmentation_index(dist({S, SS})), Rational(0));
  EXPECT_EQ(fragmentation_index(dist({N, N})), Rational(0));
  EXPECT_EQ(fragmentation_index(dist({S, S, S, O})), Rational(1, 2));
}

TEST(ComputeTrialMetrics, StaticPolarizedCamps) {
  const auto m = compute_trial_metrics(run_trial(stubborn_trial({SS, SS, SS, SO, SO, SO})).transcript);
  EXPECT_EQ(m.conformity_rate, Rational(0));
  EXPECT_EQ(m.polarization_series, std::vector<Rational>(5, Rational(2)));
  EXPECT_EQ(m.delta_p_abs, Rational(0));
  EXPECT_EQ(m.fragmentation_series, std::vector<Rational>(5, Rational(1)));
}

TEST(ComputeTrialMetrics, AllNeutral) {
  const auto m = compute_trial_metrics(run_trial(stubborn_trial({N, N, N, N})).transcript);
  EXPECT_EQ(m.conformity_rate, Rational(0));
  EXPECT_EQ(m.polarization_series, std::vector<Rational>(5, Rational(0)));
  EXPECT_EQ(m.fragmentation_series, std::vector<Rational>(5, Rational(0)));
}

TEST(ComputeTrialMetrics, ConformistTrio) {
  const auto m = compute_trial_metrics(run_trial(conformist_trio()).transcript);
  EXPECT_EQ(m.opportunities, 12);
  EXPECT_EQ(m.conformity_rate, Rational(1, 3));
  EXPECT_EQ(m.fragmentation_series.back(), Rational(0));
  EXPECT_EQ(m.polarization_series.front(), Rational(2));
  EXPECT_EQ(m.polarization_series[2], Rational(4, 3));
  EXPECT_EQ(m.polarization_series.back(), Rational(2));
}

TEST(ComputeTrialMetrics, CountsFallbackStances) {
  auto t = run_trial(conformist_trio()).transcript;
  t.posts[4].stance_source = StanceSource::FallbackPrevious;
  t.posts[7].stance_source = StanceSource::FallbackPrevious;
  EXPECT_EQ(compute_trial_metrics(t).fallback_stance_count, 2);
}

TEST(OracleEquivalence, SeededRandomTrials) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto t = run_trial(random_trial(seed * 7919 + 1, 2 + seed % 7, 2 + seed % 5)).transcript;
    expect_matches_oracle(t, MajorityScope::Inclusive);
    expect_matches_oracle(t, MajorityScope::Exclusive);
  }
}

TEST(OracleEquivalence, ArbitraryStanceMatrices) {
  SplitMix64 gen(2024);
  for (int i = 0; i < 300; ++i) {
    const auto t = random_transcript(gen);
    expect_matches_oracle(t, MajorityScope::Inclusive);
    expect_matches_oracle(t, MajorityScope::Exclusive);
  }
}

TEST(Properties, BoundsOnArbitraryTranscripts) {
  SplitMix64 gen(77);
  for (int i = 0; i < 1000; ++i) {
    const auto m = compute_trial_metrics(random_transcript(gen));
    EXPECT_GE(m.conformity_rate, Rational(0));
    EXPECT_LE(m.conformity_rate, Rational(1));
    for (const auto& p : m.polarization_series) {
      EXPECT_GE(p, Rational(0));
      EXPECT_LE(p, Rational(2));
    }
    for (const auto& f : m.fragmentation_series) {
      EXPECT_GE(f, Rational(0));
      EXPECT_LE(f, Rational(1));
    }
    EXPECT_EQ(m.delta_p_abs, abs(m.delta_p_signed));
  }
}

TEST(Properties, OpportunitiesAreAgentsTimesUpdateWindows) {
  SplitMix64 gen(78);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_transcript(gen);
    EXPECT_EQ(compute_trial_metrics(t).opportunities,
              static_cast<std::int64_t>(t.personas.size()) * (t.rounds_total - 1));
  }
}

TEST(Properties, NegationSymmetry) {
  SplitMix64 gen(79);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_transcript(gen);
    const auto a = compute_trial_metrics(t);
    const auto b = compute_trial_metrics(negated(t));
    EXPECT_EQ(a.conformity_rate, b.conformity_rate);
    EXPECT_EQ(a.polarization_series, b.polarization_series);
    EXPECT_EQ(a.fragmentation_series, b.fragmentation_series);
  }
}

TEST(Properties, MonotoneExtremity) {
  SplitMix64 gen(80);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Stance> v(1 + gen.uniform(8));
    for (auto& s : v) s = kAllStances[gen.uniform(5)];
    const std::size_t k = gen.uniform(v.size());
    const int a = std::abs(value(v[k]));
    if (a == 2) continue;
    const int b = a + 1 + static_cast<int>(gen.uniform(2 - a));
    auto w = v;
    w[k] = stance_from_value(gen.uniform(2) ? b : -b);
    EXPECT_GT(polarization_index(dist(w)), polarization_index(dist(v)));
  }
}

TEST(Properties, FragmentationIsOneExactlyWhenCampsBalance) {
  SplitMix64 gen(81);
  for (int i = 0; i < 2000; ++i) {
    std::vector<Stance> v(1 + gen.uniform(8));
    for (auto& s : v) s = kAllStances[gen.uniform(5)];
    int sup = 0, opp = 0;
    for (Stance s : v) {
      sup += value(s) > 0;
      opp += value(s) < 0;
    }
    EXPECT_EQ(fragmentation_index(dist(v)) == Rational(1), sup == opp && sup > 0);
  }
}
