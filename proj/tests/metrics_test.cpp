// Copyright 2026 The ToxiShield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include <boost/rational.hpp>

#include "toxishield/metrics.hpp"

using namespace toxishield;
using namespace toxishield::metrics;
using Q = boost::rational<long long>;

namespace {

double d(Q q) { return boost::rational_cast<double>(q); }

std::vector<BinaryLabel> labels(std::initializer_list<int> v) {
  std::vector<BinaryLabel> out;
  for (int x : v) out.push_back(x ? BinaryLabel::toxic : BinaryLabel::non_toxic);
  return out;
}

/// Exact kappa over rationals.
Q kappa_oracle(const std::vector<int>& a, const std::vector<int>& b, int K, bool quadratic) {
  const long long n = static_cast<long long>(a.size());
  Q num = 0, den = 0;
  for (int i = 1; i <= K; ++i)
    for (int j = 1; j <= K; ++j) {
      const Q w = quadratic ? Q((i - j) * (i - j), (K - 1) * (K - 1)) : Q(i != j ? 1 : 0);
      long long o = 0, ra = 0, rb = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        o += a[k] == i && b[k] == j;
        ra += a[k] == i;
        rb += b[k] == j;
      }
      num += w * Q(o, n);
      den += w * Q(ra, n) * Q(rb, n);
    }
  return Q(1) - num / den;
}

}  // namespace

TEST(BinaryReport, Perfect) {
  const auto g = labels({1, 0, 1, 1, 0});
  const auto r = binary_report(g, g);
  for (const auto& c : r.per_class) {
    EXPECT_EQ(c.precision, 1.0);
    EXPECT_EQ(c.recall, 1.0);
    EXPECT_EQ(c.f1, 1.0);
    EXPECT_EQ(c.mcc, 1.0);
  }
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_FALSE(r.zero_division);
}

TEST(BinaryReport, HandCountedExample) {
  // TP=2, FP=1, FN=1, TN=6 as counted: P = R = F1 = 2/3.
  const auto golds = labels({1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  const auto preds = labels({1, 1, 0, 1, 0, 0, 0, 0, 0, 0});
  const auto r = binary_report(preds, golds);
  const auto& t = r.cls("toxic");
  EXPECT_EQ(t.counts, (Counts{2, 1, 1, 6}));
  EXPECT_DOUBLE_EQ(t.precision, d(Q(2, 3)));
  EXPECT_DOUBLE_EQ(t.recall, d(Q(2, 3)));
  EXPECT_DOUBLE_EQ(t.f1, d(Q(2, 3)));
  EXPECT_DOUBLE_EQ(r.accuracy, 0.8);
  const auto& n = r.cls("non_toxic");
  EXPECT_DOUBLE_EQ(n.precision, d(Q(6, 7)));
  EXPECT_DOUBLE_EQ(n.recall, d(Q(6, 7)));
}

TEST(BinaryReport, PrecisionTwoThirdsRecallHalf) {
  // TP=2, FP=1, FN=2, TN=5: P = 2/3, R = 1/2, F1 = 4/7.
  const auto golds = labels({1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
  const auto preds = labels({1, 1, 0, 0, 1, 0, 0, 0, 0, 0});
  const auto& t = binary_report(preds, golds).cls("toxic");
  EXPECT_EQ(t.counts, (Counts{2, 1, 2, 5}));
  EXPECT_DOUBLE_EQ(t.precision, d(Q(2, 3)));
  EXPECT_DOUBLE_EQ(t.recall, d(Q(1, 2)));
  EXPECT_DOUBLE_EQ(t.f1, d(Q(4, 7)));
}

TEST(BinaryReport, DegeneratePredictor) {
  const auto r = binary_report(labels({0, 0, 0, 0}), labels({1, 0, 1, 0}));
  EXPECT_EQ(r.cls("toxic").recall, 0.0);
  EXPECT_EQ(r.cls("toxic").precision, 0.0);
  EXPECT_TRUE(r.cls("toxic").zero_division);
  EXPECT_TRUE(r.zero_division);
}

TEST(BinaryReport, Errors) {
  EXPECT_THROW(binary_report(labels({1}), labels({1, 0})), LengthMismatch);
  EXPECT_THROW(binary_report({}, {}), EmptyInput);
}

TEST(Mcc, SpecExamples) {
  ConfusionMatrix perfect({"a", "b", "c"});
  for (std::size_t k = 0; k < 3; ++k) perfect.add(k, k, 4);
  for (double m : per_class_mcc(perfect)) EXPECT_DOUBLE_EQ(m, 1.0);

  EXPECT_EQ(binary_mcc({1, 1, 1, 1}), 0.0);

  // (6·2 − 1·1)/√(7·7·3·3) = 11/21; exact square compared as a rational.
  const Counts c{6, 1, 1, 2};
  const Q sq = Q(6 * 2 - 1 * 1) * Q(6 * 2 - 1 * 1) / Q((6 + 1) * (6 + 1) * (2 + 1) * (2 + 1));
  EXPECT_EQ(sq, Q(121, 441));
  EXPECT_NEAR(binary_mcc(c), d(Q(11, 21)), 1e-15);
}

TEST(Mcc, ZeroFactorIsZero) {
  bool zd = false;
  EXPECT_EQ(binary_mcc({3, 0, 0, 0}, &zd), 0.0);
  EXPECT_TRUE(zd);
}

TEST(Mcc, KEqualsTwoReducesToBinary) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    ConfusionMatrix cm({"neg", "pos"});
    Counts c{rng() % 20, rng() % 20, rng() % 20, rng() % 20};
    cm.add(1, 1, c.tp), cm.add(0, 1, c.fp), cm.add(1, 0, c.fn), cm.add(0, 0, c.tn);
    EXPECT_DOUBLE_EQ(mcc(cm), binary_mcc(c));
    EXPECT_DOUBLE_EQ(mcc(cm, 0), mcc(cm, 1));
  }
  ConfusionMatrix three({"a", "b", "c"});
  EXPECT_THROW(mcc(three), InvalidArgument);
}

TEST(MultilabelReport, HandEnumeratedExample) {
  const std::vector<LabelSet> preds{{Category::Profanity}, {Category::NonToxic}};
  const std::vector<LabelSet> golds{{Category::Profanity, Category::Insult}, {Category::NonToxic}};
  const auto r = multilabel_report(preds, golds);
  EXPECT_DOUBLE_EQ(r.exact_match, 0.5);
  EXPECT_EQ(r.cls("Insult").recall, 0.0);
  EXPECT_EQ(r.cls("Profanity").f1, 1.0);
  EXPECT_EQ(r.cls("NonToxic").f1, 1.0);
  EXPECT_EQ(r.cls("Insult").counts, (Counts{0, 0, 1, 1}));
  // pooled: TP=2 (Profanity, NonToxic), FP=0, FN=1
  EXPECT_DOUBLE_EQ(r.avg.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.avg.recall, d(Q(2, 3)));
  EXPECT_DOUBLE_EQ(r.macro.f1, 2.0 / 12.0);
}

TEST(MultilabelReport, SingleMiss) {
  const auto r = multilabel_report({{Category::Threat}}, {{Category::Insult}});
  EXPECT_EQ(r.exact_match, 0.0);
}

TEST(MultilabelReport, PerfectWithSkipEmpty) {
  const std::vector<LabelSet> g{{Category::Insult}, {Category::Profanity, Category::Threat}, {Category::NonToxic}};
  const auto all = multilabel_report(g, g);
  EXPECT_EQ(all.exact_match, 1.0);
  EXPECT_DOUBLE_EQ(all.macro.f1, 4.0 / 12.0);
  const auto skip = multilabel_report(g, g, {.skip_empty = true});
  EXPECT_DOUBLE_EQ(skip.macro.f1, 1.0);
  EXPECT_DOUBLE_EQ(skip.avg.f1, 1.0);
}

TEST(MultilabelReport, LengthMismatch) {
  EXPECT_THROW(multilabel_report({{Category::Insult}}, {}), LengthMismatch);
}

TEST(Aggregates, MacroIgnoresSupportMicroDoesNot) {
  // Class scores fixed at (P=1,R=1/2) for Insult and (P=1,R=1) for Threat; vary Threat support.
  auto build = [](int threat_copies) {
    std::vector<LabelSet> p, g;
    p.push_back({Category::Insult}), g.push_back({Category::Insult});
    p.push_back({Category::NonToxic}), g.push_back({Category::Insult});
    for (int i = 0; i < threat_copies; ++i) p.push_back({Category::Threat}), g.push_back({Category::Threat});
    return multilabel_report(p, g);
  };
  const auto a = build(1), b = build(9);
  EXPECT_DOUBLE_EQ(a.cls("Insult").f1, b.cls("Insult").f1);
  EXPECT_DOUBLE_EQ(a.cls("Threat").f1, b.cls("Threat").f1);
  EXPECT_DOUBLE_EQ(a.macro.recall, b.macro.recall);
  EXPECT_NE(a.avg.recall, b.avg.recall);
}

TEST(Aggregates, F1RecomputableAndOrderInvariant) {
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<LabelSet> p, g;
    const int n = 1 + static_cast<int>(rng() % 30);
    auto draw = [&] {
      if (rng() % 4 == 0) return LabelSet{Category::NonToxic};
      std::vector<Category> cs{kAllCategories[rng() % 11]};
      if (rng() % 3 == 0) cs.push_back(kAllCategories[rng() % 11]);
      return LabelSet::from(cs);
    };
    for (int i = 0; i < n; ++i) p.push_back(draw()), g.push_back(draw());
    const auto r = multilabel_report(p, g);
    for (const auto& c : r.per_class) {
      EXPECT_NEAR(c.f1, f1_from_pr(c.precision, c.recall), 1e-9);
      EXPECT_GE(c.mcc, -1.0);
      EXPECT_LE(c.mcc, 1.0);
    }
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<LabelSet> p2, g2;
    for (auto i : idx) p2.push_back(p[i]), g2.push_back(g[i]);
    const auto r2 = multilabel_report(p2, g2);
    EXPECT_EQ(r.exact_match, r2.exact_match);
    EXPECT_EQ(r.macro.f1, r2.macro.f1);
    EXPECT_EQ(r.avg.mcc, r2.avg.mcc);
    for (std::size_t k = 0; k < r.per_class.size(); ++k) EXPECT_EQ(r.per_class[k].counts, r2.per_class[k].counts);
  }
}

TEST(Detox, SpecExamples) {
  EXPECT_DOUBLE_EQ(detox_reduction({1, 1}, {0, 0}), 100.0);
  EXPECT_DOUBLE_EQ(detox_reduction({1, 1}, {0, 0}, DetoxMode::style_accuracy), 100.0);
  EXPECT_DOUBLE_EQ(detox_reduction({0.3, 0.6}, {0.3, 0.6}), 0.0);
  EXPECT_NEAR(detox_reduction({0.8, 0.8}, {0.2, 0.2}), 75.0, 1e-12);
  EXPECT_NEAR(detox_reduction({0.6, 1.0}, {0.1, 0.3}), 75.0, 1e-12);
  EXPECT_DOUBLE_EQ(detox_reduction({0.5}, {0.9}), 0.0);
  EXPECT_DOUBLE_EQ(detox_reduction({1, 1, 1, 1}, {0.1, 0.7, 0.49, 0.5}, DetoxMode::style_accuracy), 50.0);
  EXPECT_THROW(detox_reduction({0, 0}, {0, 0}), ZeroBaseline);
  EXPECT_THROW(detox_reduction({1}, {0, 0}), LengthMismatch);
  EXPECT_THROW(detox_reduction({}, {}), EmptyInput);
}

TEST(Fluency, StubScorers) {
  const std::vector<std::string> out{"a", "b", "c", "d"};
  EXPECT_DOUBLE_EQ(fluency(out, [](auto&) { return 1.0; }), 100.0);
  EXPECT_DOUBLE_EQ(fluency(out, [](auto&) { return 0.0; }), 0.0);
  EXPECT_DOUBLE_EQ(fluency(out, [](const std::string& s) { return s == "c" ? 0.0 : 1.0; }), 75.0);
  try {
    fluency(out, [](const std::string& s) -> double {
      if (s == "c") throw std::runtime_error("model crashed");
      return 1.0;
    });
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
  EXPECT_THROW(fluency(out, [](auto&) { return 1.5; }), ScorerError);
}

TEST(Preservation, StubEmbedders) {
  const std::vector<std::pair<std::string, std::string>> same{{"x", "x"}, {"y", "y"}};
  EXPECT_NEAR(preservation(same, [](const std::string& s) { return std::vector<double>{double(s[0]), 1.0}; }).percent,
              100.0, 1e-12);
  auto stub = [](const std::string& s) {
    if (s == "a") return std::vector<double>{1, 0};
    if (s == "b") return std::vector<double>{0, 1};
    if (s == "c") return std::vector<double>{1, 1};
    if (s == "n") return std::vector<double>{-1, 0};
    if (s == "z") return std::vector<double>{0, 0};
    return std::vector<double>{1, 2, 3};
  };
  EXPECT_NEAR(preservation({{"a", "b"}}, stub).percent, 0.0, 1e-12);
  EXPECT_NEAR(preservation({{"a", "c"}}, stub).percent, 100.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(preservation({{"a", "c"}}, stub).percent, 70.71, 0.005);
  const auto neg = preservation({{"a", "n"}, {"a", "a"}}, stub);
  EXPECT_NEAR(neg.percent, 50.0, 1e-12);
  EXPECT_NEAR(neg.raw[0], -1.0, 1e-12);
  try {
    preservation({{"a", "a"}, {"z", "a"}}, stub);
    FAIL();
  } catch (const ZeroVector& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  EXPECT_THROW(preservation({{"a", "q"}}, stub), DimensionMismatch);
  EXPECT_THROW(preservation({}, stub), EmptyInput);
}

TEST(JScore, PrintedRows) {
  EXPECT_NEAR(j_score(96.17, 99.01, 73.86), 88.14, 0.01);
  EXPECT_NEAR(j_score(95.27, 97.03, 67.07), 84.00, 0.01);
  EXPECT_DOUBLE_EQ(j_score(42.0, 42.0, 42.0), 42.0);
  EXPECT_EQ(j_score(0.0, 90.0, 90.0), 0.0);
  EXPECT_THROW(j_score(101.0, 90.0, 90.0), InvalidArgument);
  EXPECT_THROW(j_score(-1.0, 90.0, 90.0), InvalidArgument);
}

TEST(JScore, MatchesRationalOracle) {
  const Q a(9617, 100), b(9901, 100), c(7386, 100);
  const Q j = Q(3) / (Q(1) / a + Q(1) / b + Q(1) / c);
  EXPECT_NEAR(j_score(96.17, 99.01, 73.86), d(j), 1e-10);
}

TEST(TstReport, FromScoredPairs) {
  std::vector<TstPair> pairs{{"1", "a", "b", 0.9, 0.1, 1.0, 0.8}, {"2", "c", "d", 0.7, 0.3, 0.0, 0.6}};
  const auto r = tst_report(pairs);
  EXPECT_NEAR(r.detox, 75.0, 1e-9);
  EXPECT_NEAR(r.fluency, 50.0, 1e-12);
  EXPECT_NEAR(r.preserve, 70.0, 1e-9);
  EXPECT_NEAR(r.j_score, j_score(75.0, 50.0, 70.0), 1e-9);
  EXPECT_EQ(r.pairs.size(), 2u);
  EXPECT_THROW(tst_report({}), EmptyInput);
}

TEST(Kappa, HandExampleAgainstRationalOracle) {
  const std::vector<int> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 4};
  EXPECT_EQ(kappa_oracle(a, b, 5, true), Q(16, 17));
  EXPECT_EQ(kappa_oracle(a, b, 5, false), Q(3, 4));
  EXPECT_NEAR(weighted_kappa(a, b, 5).kappa, 16.0 / 17.0, 1e-12);
  EXPECT_NEAR(weighted_kappa(a, b, 5, Weighting::unweighted).kappa, 0.75, 1e-12);
}

TEST(Kappa, PerfectAndDegenerate) {
  EXPECT_DOUBLE_EQ(weighted_kappa({1, 3, 5, 2}, {1, 3, 5, 2}, 5).kappa, 1.0);
  EXPECT_DOUBLE_EQ(weighted_kappa({4, 4, 4}, {4, 4, 4}, 5).kappa, 1.0);
  // Constant but different raters: observed and expected disagreement coincide.
  EXPECT_DOUBLE_EQ(weighted_kappa({2, 2, 2}, {4, 4, 4}, 5).kappa, 0.0);
  EXPECT_LE(weighted_kappa({1, 5, 1, 5}, {5, 1, 5, 1}, 5).kappa, 1.0);
  EXPECT_THROW(weighted_kappa({1, 6}, {1, 2}, 5), InvalidArgument);
  EXPECT_THROW(weighted_kappa({1}, {1, 2}, 5), LengthMismatch);
}

TEST(Kappa, RandomRatingsAgreeWithOracle) {
  std::mt19937_64 rng(2);
  for (int iter = 0; iter < 300; ++iter) {
    const int K = 2 + static_cast<int>(rng() % 5);
    const std::size_t n = 2 + rng() % 20;
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = 1 + static_cast<int>(rng() % K), b[i] = 1 + static_cast<int>(rng() % K);
    for (bool quad : {true, false}) {
      const auto r = weighted_kappa(a, b, K, quad ? Weighting::quadratic : Weighting::unweighted);
      if (r.expected_disagreement == 0.0) continue;
      EXPECT_NEAR(r.kappa, d(kappa_oracle(a, b, K, quad)), 1e-9);
      EXPECT_LE(r.kappa, 1.0 + 1e-12);
    }
  }
}

TEST(Kappa, IndependentRatersNearZero) {
  std::mt19937_64 rng(42);
  std::vector<int> a(10000), b(10000);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1 + static_cast<int>(rng() % 5), b[i] = 1 + static_cast<int>(rng() % 5);
  EXPECT_NEAR(weighted_kappa(a, b, 5).kappa, 0.0, 0.05);
  EXPECT_NEAR(weighted_kappa(a, b, 5, Weighting::unweighted).kappa, 0.0, 0.05);
}
