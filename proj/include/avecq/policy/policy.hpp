#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "avecq/common/bytes.hpp"
#include "avecq/common/units.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::policy {

enum class AnswerRule : std::uint8_t { MostFrequent = 1, Average = 2 };

inline std::string to_string(AnswerRule r) { return r == AnswerRule::MostFrequent ? "mf" : "avg"; }
inline AnswerRule answer_rule_from_string(const std::string& s) {
  if (s == "mf") return AnswerRule::MostFrequent;
  if (s == "avg") return AnswerRule::Average;
  throw PolicyError("unknown answer rule '" + s + "' (expected mf or avg)");
}

/// Nonnegative fraction kept in lowest terms.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Fraction reduced(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw PolicyError("fraction with zero denominator");
    auto g = std::gcd(num, den);
    if (g == 0) g = 1;
    return {num / g, den / g};
  }
  static Fraction parse(const std::string& s) {
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return reduced(std::stoull(s), 1);
      return reduced(std::stoull(s.substr(0, slash)), std::stoull(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw PolicyError("malformed fraction '" + s + "'");
    }
  }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Answer-calculation rule, quality threshold, flat payment rates and (for
/// Avg) the tolerance band, over an answer domain of ids 0..choices-1.
struct TaskPolicy {
  AnswerRule rule = AnswerRule::MostFrequent;
  std::uint32_t gamma = 1;
  Fraction threshold{0, 1};
  Wei p_correct = 0;
  Wei p_incorrect = 0;
  std::uint32_t tolerance = 0;
  std::uint32_t choices = 2;

  friend bool operator==(const TaskPolicy&, const TaskPolicy&) = default;

  void validate() const {
    if (choices == 0 || choices > (1u << 16)) throw PolicyError("answer domain size must be in [1, 65536]");
    if (threshold.den == 0 || threshold.num > threshold.den) throw PolicyError("threshold must lie in [0, 1]");
    if (std::gcd(threshold.num, threshold.den) > 1) throw PolicyError("threshold must be a reduced fraction");
    if (p_correct < p_incorrect) throw PolicyError("p_correct must be at least p_incorrect");
    if (rule == AnswerRule::MostFrequent && (gamma == 0 || gamma > choices))
      throw PolicyError("gamma must be in [1, choices]");
  }

  /// Number of 32-bit words in an encoded final answer.
  std::size_t final_answer_words() const { return rule == AnswerRule::MostFrequent ? gamma : 2; }

  void write(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(rule))
        .u32(gamma)
        .u64(threshold.num)
        .u64(threshold.den)
        .u64(p_correct)
        .u64(p_incorrect)
        .u32(tolerance)
        .u32(choices);
  }
  static TaskPolicy read(ByteReader& r) {
    TaskPolicy p;
    auto rule = r.u8();
    if (rule != 1 && rule != 2) throw EncodingError("unknown answer rule tag");
    p.rule = static_cast<AnswerRule>(rule);
    p.gamma = r.u32();
    p.threshold.num = r.u64();
    p.threshold.den = r.u64();
    p.p_correct = r.u64();
    p.p_incorrect = r.u64();
    p.tolerance = r.u32();
    p.choices = r.u32();
    return p;
  }

  crypto::Digest digest() const {
    ByteWriter w;
    w.u8(kEncodingVersion);
    write(w);
    return crypto::hash_tagged("avecq/policy/v1", {w.bytes()});
  }

  nlohmann::ordered_json to_json() const {
    return {{"rule", to_string(rule)},     {"gamma", gamma},
            {"threshold", threshold.str()}, {"p_correct_wei", p_correct},
            {"p_incorrect_wei", p_incorrect}, {"tolerance", tolerance},
            {"choices", choices}};
  }
};

/// Beta-distribution quality parameters, both starting at 1.
struct QualityState {
  std::uint64_t alpha = 1;
  std::uint64_t beta = 1;
  friend bool operator==(const QualityState&, const QualityState&) = default;
};

struct FinalAnswer {
  AnswerRule rule = AnswerRule::MostFrequent;
  std::vector<std::uint32_t> top;  // MF: gamma ids by (count desc, id asc)
  std::uint64_t sum = 0;           // Avg numerator
  std::uint64_t count = 0;         // Avg denominator

  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;

  std::vector<std::uint32_t> words() const {
    if (rule == AnswerRule::MostFrequent) return top;
    return {static_cast<std::uint32_t>(sum), static_cast<std::uint32_t>(count)};
  }

  static FinalAnswer from_words(std::span<const std::uint32_t> words, const TaskPolicy& p) {
    if (words.size() != p.final_answer_words()) throw PolicyError("final answer has the wrong word count");
    FinalAnswer f;
    f.rule = p.rule;
    if (p.rule == AnswerRule::MostFrequent) {
      f.top.assign(words.begin(), words.end());
    } else {
      f.sum = words[0];
      f.count = words[1];
    }
    return f;
  }

  nlohmann::ordered_json to_json() const {
    if (rule == AnswerRule::MostFrequent) return {{"rule", "mf"}, {"answers", top}};
    return {{"rule", "avg"}, {"numerator", sum}, {"denominator", count}};
  }
};

/// AnsCalc. Qualities are accepted for signature compatibility; the shipped
/// rules are unweighted, so they must either be empty or match the answers.
inline FinalAnswer ans_calc(std::span<const std::uint32_t> answers, std::span<const QualityState> qualities,
                            const TaskPolicy& p) {
  if (answers.empty()) throw PolicyError("ans_calc needs at least one answer");
  if (!qualities.empty() && qualities.size() != answers.size())
    throw PolicyError("qualities must be empty or one per answer");
  for (auto a : answers)
    if (a >= p.choices) throw PolicyError("answer id outside the task's answer domain");

  FinalAnswer f;
  f.rule = p.rule;
  if (p.rule == AnswerRule::Average) {
    for (auto a : answers) f.sum += a;
    f.count = answers.size();
    return f;
  }
  std::vector<std::uint64_t> counts(p.choices, 0);
  for (auto a : answers) ++counts[a];
  std::vector<std::uint32_t> ids(p.choices);
  std::iota(ids.begin(), ids.end(), 0u);
  std::stable_sort(ids.begin(), ids.end(), [&](auto x, auto y) { return counts[x] > counts[y]; });
  f.top.assign(ids.begin(), ids.begin() + p.gamma);
  return f;
}

inline bool is_correct(std::uint32_t answer, const FinalAnswer& final, const TaskPolicy& p) {
  if (p.rule == AnswerRule::MostFrequent)
    return std::find(final.top.begin(), final.top.end(), answer) != final.top.end();
  if (final.count == 0) return false;
  __int128 diff = static_cast<__int128>(answer) * final.count - static_cast<__int128>(final.sum);
  if (diff < 0) diff = -diff;
  return diff <= static_cast<__int128>(p.tolerance) * final.count;
}

inline QualityState qual_update(QualityState q, bool correct) {
  if (correct)
    ++q.alpha;
  else
    ++q.beta;
  return q;
}

inline Fraction quality_mean(const QualityState& q) { return Fraction::reduced(q.alpha, q.alpha + q.beta); }

/// Strict alpha/(alpha+beta) > T/D, in integers.
inline bool clears_threshold(const QualityState& q, const TaskPolicy& p) {
  using u128 = unsigned __int128;
  return static_cast<u128>(q.alpha) * p.threshold.den >
         static_cast<u128>(p.threshold.num) * (static_cast<u128>(q.alpha) + q.beta);
}

inline Wei paym_calc(bool correct, const TaskPolicy& p) { return correct ? p.p_correct : p.p_incorrect; }

}  // namespace avecq::policy
