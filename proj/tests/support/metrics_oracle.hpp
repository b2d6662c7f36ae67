#pragma once

// Brute-force recomputation of the trial metrics straight from raw posts.
// Shares no code with the metrics implementation: its own fraction type, its
// own stance bookkeeping, its own mode search.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "forumsim/types.hpp"

namespace forumsim::testing {

struct Frac {
  long long num = 0;
  long long den = 1;

  Frac() = default;
  Frac(long long n, long long d) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Frac operator+(Frac a, Frac b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Frac operator-(Frac a, Frac b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend bool operator==(Frac a, Frac b) { return a.num == b.num && a.den == b.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct OracleMetrics {
  long long opportunities = 0;
  long long conforming = 0;
  Frac cr;
  std::vector<Frac> p;
  Frac dp_signed;
  Frac dp_abs;
  std::vector<Frac> f;
};

inline OracleMetrics oracle_metrics(const Transcript& t, bool exclusive = false) {
  const auto n = static_cast<long long>(t.personas.size());
  std::map<std::string, int> stance;  // author -> latest value
  for (const auto& per : t.personas) stance[per.id] = 0;

  OracleMetrics o;
  o.opportunities = n * (t.rounds_total - 1);

  for (const Post& post : t.posts) {
    const int now = static_cast<int>(post.declared_stance);
    if (post.round >= 2) {
      int count[5] = {0, 0, 0, 0, 0};
      for (const auto& [author, v] : stance) {
        if (exclusive && author == post.author) continue;
        ++count[v + 2];
      }
      int best = -1, best_count = -1, ties = 0;
      for (int k = 0; k < 5; ++k) {
        if (count[k] > best_count) {
          best = k;
          best_count = count[k];
          ties = 1;
        } else if (count[k] == best_count) {
          ++ties;
        }
      }
      const int before = stance[post.author];
      if (ties == 1 && now != before) {
        const int maj = best - 2;
        if (std::abs(now - maj) < std::abs(before - maj)) ++o.conforming;
      }
    }
    stance[post.author] = now;

    // End of a round: every agent has posted in it.
    const bool round_done = post.author == t.personas.back().id;
    if (round_done) {
      long long abs_sum = 0, sup = 0, opp = 0;
      for (const auto& [author, v] : stance) {
        abs_sum += std::abs(v);
        if (v > 0) ++sup;
        if (v < 0) ++opp;
      }
      o.p.emplace_back(abs_sum, n);
      if (sup + opp == 0) {
        o.f.emplace_back(0, 1);
      } else {
        o.f.push_back(Frac(1, 1) - Frac(std::llabs(sup - opp), sup + opp));
      }
    }
  }
  o.cr = Frac(o.conforming, o.opportunities);
  o.dp_signed = o.p.back() - o.p.front();
  o.dp_abs = o.dp_signed.num < 0 ? Frac(-o.dp_signed.num, o.dp_signed.den) : o.dp_signed;
  return o;
}

}  // namespace forumsim::testing
