#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avecq/protocol/common.hpp"

namespace avecq::protocol {

/// How response screening classified a SubmitResponse.
enum class Verdict : std::uint8_t {
  Accepted,
  Malformed,      // payload does not decode
  UnknownRoot,    // membership proved against a root that was never published
  ProofRejected,  // ProveQual proof does not verify
  Duplicate,      // same tag or answer ciphertext as an earlier response to this task
  TagCollision,   // same tag as a response to an earlier task: stale quality
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::Malformed: return "malformed";
    case Verdict::UnknownRoot: return "unknown_root";
    case Verdict::ProofRejected: return "proof_rejected";
    case Verdict::Duplicate: return "duplicate";
    case Verdict::TagCollision: return "tag_collision";
  }
  return "?";
}

struct ResponseInput {
  std::uint64_t seq;
  ContractId contract;
  ByteView payload;
  bool root_published;  // at the time of inclusion
};

template <PrimeOrderGroup G>
struct ScreenedResponse {
  std::uint64_t seq = 0;
  ContractId contract = 0;
  std::optional<ResponseTuple<G>> tuple;
  Verdict verdict = Verdict::Malformed;
  std::optional<std::uint64_t> conflicts_with;
};

template <PrimeOrderGroup G>
using SpecLookup = std::function<const TaskSpec<G>*(ContractId)>;

/// Classifies every included response in seq order. Only accepted responses
/// enter the dedupe sets, so garbage cannot shadow a later honest tuple.
template <PrimeOrderGroup G>
std::vector<ScreenedResponse<G>> screen_responses(const Environment<G>& env, const std::vector<ResponseInput>& inputs,
                                                  const SpecLookup<G>& spec_of) {
  std::vector<ScreenedResponse<G>> out;
  std::map<Digest, std::pair<std::uint64_t, ContractId>> tags;
  std::map<Bytes, std::pair<std::uint64_t, ContractId>> answers;
  const auto params = env.params();
  for (const auto& in : inputs) {
    ScreenedResponse<G> s;
    s.seq = in.seq;
    s.contract = in.contract;
    const auto* spec = spec_of(in.contract);
    try {
      s.tuple = ResponseTuple<G>::from_bytes(in.payload);
    } catch (const EncodingError&) {
    }
    if (!s.tuple || !spec) {
      s.verdict = Verdict::Malformed;
    } else if (!in.root_published) {
      s.verdict = Verdict::UnknownRoot;
    } else {
      const auto& t = *s.tuple;
      bool ok = false;
      try {
        auto x = t.statement(params, spec->policy, spec->pk_r, env.pk_ra);
        x.validate_shape();
        ok = relations::verify<G>(env.backend, x, t.proof);
      } catch (const MalformedStatement&) {
      }
      if (!ok) {
        s.verdict = Verdict::ProofRejected;
      } else {
        ByteWriter aw;
        t.answer.write(aw);
        auto answer_bytes = std::move(aw).bytes();
        std::optional<std::pair<std::uint64_t, ContractId>> hit;
        if (auto it = tags.find(t.tag); it != tags.end()) hit = it->second;
        else if (auto jt = answers.find(answer_bytes); jt != answers.end()) hit = jt->second;
        if (hit) {
          s.verdict = hit->second == in.contract ? Verdict::Duplicate : Verdict::TagCollision;
          s.conflicts_with = hit->first;
        } else {
          s.verdict = Verdict::Accepted;
          tags.emplace(t.tag, std::pair{in.seq, in.contract});
          answers.emplace(std::move(answer_bytes), std::pair{in.seq, in.contract});
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Screening over the live ledger. Roots only accumulate, so "published now"
/// is used for "published at inclusion".
template <PrimeOrderGroup G>
std::vector<ScreenedResponse<G>> screen_ledger(const Environment<G>& env, const Ledger<G>& l) {
  std::vector<ResponseInput> inputs;
  std::vector<ResponseTuple<G>> keep;
  for (const auto& t : l.transactions()) {
    if (t.tx.method != Method::SubmitResponse || t.status != ledger::TxStatus::Ok) continue;
    bool root_ok = false;
    try {
      root_ok = l.is_published_root(ResponseTuple<G>::from_bytes(t.tx.payload).mt_root);
    } catch (const EncodingError&) {
    }
    inputs.push_back({t.seq, t.tx.contract, t.tx.payload, root_ok});
  }
  return screen_responses<G>(env, inputs, [&](ContractId c) -> const TaskSpec<G>* {
    if (c >= l.contract_count()) return nullptr;
    const auto& st = l.read(c);
    return st.spec ? &*st.spec : nullptr;
  });
}

template <PrimeOrderGroup G>
relations::AuthCalcStatement<G> auth_calc_statement(const Environment<G>& env, const TaskSpec<G>& spec,
                                                    const std::vector<EncryptedValue<G>>& answers,
                                                    const EncryptedValue<G>& final_answer) {
  return {env.params(), spec.policy, spec.pk_r, answers, final_answer};
}

template <PrimeOrderGroup G>
relations::AuthQualStatement<G> auth_qual_statement(const Environment<G>& env, const TaskSpec<G>& spec,
                                                    const AuthCalcPost<G>& calc, const ResponseTuple<G>& tuple,
                                                    const CommitmentPair<G>& new_pair) {
  relations::AuthQualStatement<G> x;
  x.params = env.params();
  x.policy = spec.policy;
  x.pk_r = spec.pk_r;
  if (!calc.is_void) x.final_answer = calc.final_answer;
  x.answer = tuple.answer;
  x.old_pair = tuple.rerandomized;
  x.new_pair = new_pair;
  return x;
}

template <PrimeOrderGroup G>
relations::AuthValueStatement<G> auth_value_statement(const Environment<G>& env, const TaskSpec<G>& spec,
                                                      const AuthCalcPost<G>& calc, const ResponseTuple<G>& tuple) {
  return {env.params(), spec.policy, spec.pk_r, calc.final_answer, tuple.answer};
}

/// Reason the final-answer post fails to verify, if any.
template <PrimeOrderGroup G>
std::optional<std::string> calc_defect(const Environment<G>& env, const TaskSpec<G>& spec, const AuthCalcPost<G>& calc,
                                       const std::map<std::uint64_t, ResponseTuple<G>>& accepted) {
  std::vector<EncryptedValue<G>> answers;
  for (auto seq : calc.responses) {
    auto it = accepted.find(seq);
    if (it == accepted.end()) return "final answer counts response " + std::to_string(seq) + " that screening rejects";
    answers.push_back(it->second.answer);
  }
  if (calc.is_void) {
    if (calc.responses.size() >= spec.n_th) return std::string("void declared with enough responses");
    return std::nullopt;
  }
  if (calc.responses.size() < spec.n_th) return std::string("final answer computed below n_th");
  try {
    auto x = auth_calc_statement(env, spec, answers, calc.final_answer);
    x.validate_shape();
    if (!calc.proof || !relations::verify<G>(env.backend, x, *calc.proof)) return std::string("AuthCalc proof rejected");
  } catch (const MalformedStatement& e) {
    return std::string("AuthCalc statement malformed: ") + e.what();
  }
  return std::nullopt;
}

/// Reason a quality post fails to verify, if any.
template <PrimeOrderGroup G>
std::optional<std::string> post_defect(const Environment<G>& env, const TaskSpec<G>& spec, const AuthCalcPost<G>& calc,
                                       const ResponseTuple<G>& tuple, const QualityPost<G>& post) {
  try {
    auto xq = auth_qual_statement(env, spec, calc, tuple, post.new_pair);
    xq.validate_shape();
    if (!relations::verify<G>(env.backend, xq, post.auth_qual)) return std::string("AuthQual proof rejected");
    if (post.auth_value) {
      if (calc.is_void) return std::string("AuthValue proof on a void task");
      auto xv = auth_value_statement(env, spec, calc, tuple);
      xv.validate_shape();
      if (!relations::verify<G>(env.backend, xv, *post.auth_value)) return std::string("AuthValue proof rejected");
    }
  } catch (const MalformedStatement& e) {
    return std::string("statement malformed: ") + e.what();
  }
  return std::nullopt;
}

/// What a post entitles its worker to: p_correct with an AuthValue proof,
/// p_incorrect without, and the response fee back on a void task.
template <PrimeOrderGroup G>
Wei entitlement(const TaskSpec<G>& spec, const AuthCalcPost<G>& calc, const QualityPost<G>& post, Wei response_fee) {
  if (calc.is_void) return response_fee;
  return policy::paym_calc(post.auth_value.has_value(), spec.policy);
}

}  // namespace avecq::protocol
