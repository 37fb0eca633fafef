#include <gtest/gtest.h>

#include <boost/rational.hpp>

#include <algorithm>

#include "avecq/crypto/drbg.hpp"
#include "avecq/policy/policy.hpp"
#include "oracles.hpp"

using namespace avecq;
using namespace avecq::policy;

namespace {

TaskPolicy mf(std::uint32_t gamma, std::uint32_t choices) {
  TaskPolicy p;
  p.rule = AnswerRule::MostFrequent;
  p.gamma = gamma;
  p.choices = choices;
  p.p_correct = 100;
  p.p_incorrect = 50;
  return p;
}

TaskPolicy avg(std::uint32_t tolerance, std::uint32_t choices) {
  TaskPolicy p;
  p.rule = AnswerRule::Average;
  p.tolerance = tolerance;
  p.choices = choices;
  p.p_correct = 100;
  p.p_incorrect = 50;
  return p;
}

}  // namespace

TEST(AnsCalc, StrictMajority) {
  std::vector<std::uint32_t> answers{1, 1, 1, 0, 0};
  auto f = ans_calc(answers, {}, mf(1, 2));
  EXPECT_EQ(f.top, (std::vector<std::uint32_t>{1}));
}

TEST(AnsCalc, ExactMean) {
  std::vector<std::uint32_t> ratings{4, 5, 3, 4};
  auto f = ans_calc(ratings, {}, avg(1, 6));
  EXPECT_EQ(f.sum, 16u);
  EXPECT_EQ(f.count, 4u);
}

TEST(AnsCalc, ThreeMostFrequentWithTies) {
  // counts by id: 0->3, 1->7, 2->1, 3->7, 4->2
  std::vector<std::uint32_t> answers;
  const std::uint32_t counts[] = {3, 7, 1, 7, 2};
  for (std::uint32_t id = 0; id < 5; ++id) answers.insert(answers.end(), counts[id], id);
  auto f = ans_calc(answers, {}, mf(3, 5));
  EXPECT_EQ(f.top, (std::vector<std::uint32_t>{1, 3, 0}));
}

TEST(AnsCalc, MatchesRecountOracle) {
  crypto::Drbg rng(11);
  for (int i = 0; i < 2000; ++i) {
    auto choices = static_cast<std::uint32_t>(1 + rng.below(8));
    auto gamma = static_cast<std::uint32_t>(1 + rng.below(choices));
    std::vector<std::uint32_t> answers(1 + rng.below(64));
    for (auto& a : answers) a = static_cast<std::uint32_t>(rng.below(choices));
    ASSERT_EQ(ans_calc(answers, {}, mf(gamma, choices)).top, oracle::top_gamma(answers, choices, gamma));
  }
}

TEST(AnsCalc, Errors) {
  std::vector<std::uint32_t> none;
  EXPECT_THROW(ans_calc(none, {}, mf(1, 2)), PolicyError);
  std::vector<std::uint32_t> bad{0, 2};
  EXPECT_THROW(ans_calc(bad, {}, mf(1, 2)), PolicyError);
  std::vector<std::uint32_t> ok{0, 1};
  std::vector<QualityState> q(3);
  EXPECT_THROW(ans_calc(ok, q, mf(1, 2)), PolicyError);
  q.resize(2);
  EXPECT_NO_THROW(ans_calc(ok, q, mf(1, 2)));
}

TEST(AnsCalc, PermutationInvariant) {
  crypto::Drbg rng(12);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint32_t> answers(1 + rng.below(40));
    for (auto& a : answers) a = static_cast<std::uint32_t>(rng.below(5));
    auto p = mf(3, 5);
    auto ref = ans_calc(answers, {}, p);
    std::shuffle(answers.begin(), answers.end(), rng);
    ASSERT_EQ(ans_calc(answers, {}, p), ref);
    ASSERT_EQ(ans_calc(answers, {}, avg(1, 5)), ans_calc(answers, {}, avg(1, 5)));
  }
}

TEST(IsCorrect, Examples) {
  std::vector<std::uint32_t> answers{1, 1, 0};
  auto p = mf(1, 2);
  auto f = ans_calc(answers, {}, p);
  EXPECT_TRUE(is_correct(1, f, p));
  EXPECT_FALSE(is_correct(0, f, p));

  std::vector<std::uint32_t> ratings{4, 5, 3, 4};
  auto pa = avg(1, 6);
  auto fa = ans_calc(ratings, {}, pa);
  EXPECT_TRUE(is_correct(5, fa, pa));
  EXPECT_TRUE(is_correct(3, fa, pa));
  EXPECT_FALSE(is_correct(2, fa, pa));
}

TEST(IsCorrect, AgreesWithFloatingReference) {
  crypto::Drbg rng(13);
  for (int i = 0; i < 10000; ++i) {
    auto eps = static_cast<std::uint32_t>(rng.below(3));
    auto p = avg(eps, 5);
    std::vector<std::uint32_t> answers(1 + rng.below(64));
    for (auto& a : answers) a = static_cast<std::uint32_t>(rng.below(5));
    auto f = ans_calc(answers, {}, p);
    auto a = static_cast<std::uint32_t>(rng.below(5));
    ASSERT_EQ(is_correct(a, f, p), oracle::avg_correct(a, answers, eps)) << i;
  }
}

TEST(QualUpdate, BetaRule) {
  EXPECT_EQ(qual_update({1, 1}, true), (QualityState{2, 1}));
  EXPECT_EQ(qual_update({1, 1}, false), (QualityState{1, 2}));
  crypto::Drbg rng(14);
  QualityState q;
  for (int i = 0; i < 100; ++i) {
    auto before = q.alpha + q.beta;
    q = qual_update(q, rng.below(2) == 1);
    ASSERT_EQ(q.alpha + q.beta, before + 1);
  }
}

TEST(QualityMean, ExactFraction) {
  EXPECT_EQ(quality_mean({2, 2}), (Fraction{1, 2}));
  EXPECT_EQ(quality_mean({3, 1}), (Fraction{3, 4}));
}

TEST(Threshold, Examples) {
  auto p = mf(1, 2);
  p.threshold = {3, 4};
  EXPECT_FALSE(clears_threshold({1, 1}, p));
  EXPECT_TRUE(clears_threshold({4, 1}, p));
  EXPECT_FALSE(clears_threshold({3, 1}, p));  // exactly 75% does not clear
}

TEST(Threshold, MatchesRationalOracle) {
  using R = boost::rational<long long>;
  for (auto [t, d] : {std::pair{1, 2}, std::pair{3, 4}, std::pair{9, 10}}) {
    auto p = mf(1, 2);
    p.threshold = Fraction::reduced(t, d);
    for (std::uint64_t a = 1; a <= 50; ++a) {
      for (std::uint64_t b = 1; b <= 50; ++b) {
        bool expect = R(static_cast<long long>(a), static_cast<long long>(a + b)) > R(t, d);
        ASSERT_EQ(clears_threshold({a, b}, p), expect) << a << "," << b;
      }
      // monotone in alpha at fixed beta
      for (std::uint64_t b = 1; b <= 50 && a > 1; ++b)
        ASSERT_TRUE(!clears_threshold({a - 1, b}, p) || clears_threshold({a, b}, p));
    }
  }
}

TEST(Payment, FlatRates) {
  auto p = mf(1, 2);
  EXPECT_EQ(paym_calc(true, p), 100u);
  EXPECT_EQ(paym_calc(false, p), 50u);
}

TEST(Payment, BudgetBound) {
  crypto::Drbg rng(15);
  auto p = mf(1, 3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint32_t> answers(1 + rng.below(64));
    for (auto& a : answers) a = static_cast<std::uint32_t>(rng.below(3));
    auto f = ans_calc(answers, {}, p);
    Wei total = 0;
    for (auto a : answers) total += paym_calc(is_correct(a, f, p), p);
    ASSERT_LE(total, answers.size() * p.p_correct);
  }
}

TEST(TaskPolicy, Validation) {
  auto p = mf(1, 2);
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.gamma = 3;
  EXPECT_THROW(bad.validate(), PolicyError);
  bad = p;
  bad.p_incorrect = 200;
  EXPECT_THROW(bad.validate(), PolicyError);
  bad = p;
  bad.threshold = {2, 4};
  EXPECT_THROW(bad.validate(), PolicyError);
  bad = p;
  bad.threshold = {5, 4};
  EXPECT_THROW(bad.validate(), PolicyError);
  EXPECT_EQ(Fraction::parse("6/8"), (Fraction{3, 4}));
  EXPECT_THROW(Fraction::parse("x/2"), PolicyError);
  EXPECT_THROW(Fraction::parse("1/0"), PolicyError);
}

TEST(TaskPolicy, EncodingRoundTripAndDigest) {
  auto p = avg(2, 5);
  p.threshold = {1, 2};
  ByteWriter w;
  p.write(w);
  ByteReader r(w.bytes());
  EXPECT_EQ(TaskPolicy::read(r), p);
  auto q = p;
  q.tolerance = 1;
  EXPECT_NE(p.digest(), q.digest());
  EXPECT_EQ(p.digest(), TaskPolicy(p).digest());
}

TEST(FinalAnswer, WordsRoundTrip) {
  auto p = mf(3, 5);
  std::vector<std::uint32_t> answers{4, 4, 2, 1};
  auto f = ans_calc(answers, {}, p);
  EXPECT_EQ(FinalAnswer::from_words(f.words(), p), f);
  auto pa = avg(1, 5);
  auto fa = ans_calc(answers, {}, pa);
  EXPECT_EQ(FinalAnswer::from_words(fa.words(), pa), fa);
  std::vector<std::uint32_t> short_words{1};
  EXPECT_THROW(FinalAnswer::from_words(short_words, p), PolicyError);
}
