#pragma once

#include <set>
#include <string>

#include "avecq/protocol/audit.hpp"

namespace avecq::protocol {

/// Everything a worker takes away from registration. The RA forgets the
/// randomness; only the digest of m stays in its registry.
template <PrimeOrderGroup G>
struct Registration {
  crypto::Signature<G> cert;
  policy::QualityState quality;
  ScalarPair<G> r_c;
  CommitmentPair<G> base;  // the leaf pair itself: registration has no dummy
  std::uint64_t position = 0;
};

struct Ruling {
  bool upheld = false;
  std::string reason;
  std::optional<Receipt> confiscation;
};

template <PrimeOrderGroup G>
class RegistrationAuthority {
 public:
  RegistrationAuthority(crypto::KeyPair<G> keys, Wallet<G> wallet, crypto::Drbg rng)
      : keys_(std::move(keys)), wallet_(std::move(wallet)), rng_(std::move(rng)) {}

  const Element<G>& pk() const { return keys_.pk; }
  const Wallet<G>& wallet() const { return wallet_; }
  std::size_t registered() const { return registry_.size(); }

  /// Certifies m and appends the initial (1, 1) commitment pair.
  Registration<G> register_worker(Ledger<G>& l, const Scalar<G>& m) {
    auto id = crypto::hash_tagged("avecq/ra/identifier/v1", {m.to_bytes()});
    if (!registry_.insert(id).second) throw DuplicateIdentifier("identifier already registered");
    Registration<G> r;
    r.cert = crypto::sign<G>(keys_.sk, m.to_bytes());
    r.quality = {1, 1};
    r.r_c = {crypto::random_scalar<G>(rng_), crypto::random_scalar<G>(rng_)};
    r.base = crypto::commit_pair<G>(1, 1, r.r_c);
    r.position = l.append_leaf(relations::quality_leaf<G>(r.base), "ra");
    return r;
  }

  /// Re-verifies the worker's claim from chain data. Upholding confiscates the
  /// remaining escrow to the address the worker opened in the evidence.
  Ruling arbitrate(Ledger<G>& l, const Environment<G>& env, const ProtestEvidence<G>& ev) {
    if (ev.contract >= l.contract_count()) throw MalformedEvidence("unknown contract");
    const auto& st = l.read(ev.contract);
    if (!st.spec) throw MalformedEvidence("contract has no task");
    const auto& spec = *st.spec;
    if (l.block() < spec.deadlines.processing) throw MalformedEvidence("task is still being processed");

    Ruling r = judge(l, env, spec, st, ev);
    if (r.upheld && st.escrow > 0)
      r.confiscation = wallet_.send(l, Method::Confiscate, ev.contract, {}, 0, ev.address);
    l.note({{"type", "ruling"},
            {"contract", ev.contract},
            {"response", ev.response},
            {"claim", to_string(ev.claim)},
            {"upheld", r.upheld},
            {"reason", r.reason},
            {"block", l.block()}});
    return r;
  }

 private:
  Ruling judge(const Ledger<G>& l, const Environment<G>& env, const TaskSpec<G>& spec,
               const ledger::ContractState<G>& st, const ProtestEvidence<G>& ev) const {
    auto dismiss = [](std::string why) { return Ruling{false, std::move(why), std::nullopt}; };
    auto uphold = [](std::string why) { return Ruling{true, std::move(why), std::nullopt}; };

    if (ev.response >= l.transactions().size()) return dismiss("response is not on chain");
    const auto& rtx = l.tx(ev.response);
    if (rtx.tx.method != Method::SubmitResponse || rtx.tx.contract != ev.contract ||
        rtx.status != ledger::TxStatus::Ok || rtx.tx.payload != ev.tuple.to_bytes())
      return dismiss("response is not on chain");

    const ScreenedResponse<G>* own = nullptr;
    auto screened = screen_ledger(env, l);
    for (const auto& s : screened)
      if (s.seq == ev.response) own = &s;
    if (!own || own->verdict != Verdict::Accepted)
      return dismiss(std::string("response was legitimately excluded: ") + (own ? to_string(own->verdict) : "missing"));

    if (!relations::reencrypts_to<G>(spec.pk_r, ev.tuple.address, crypto::u32_limbs(ev.address), ev.address_rand))
      return dismiss("address opening does not match the response");

    if (!st.auth_calc) return uphold("no final answer was posted");
    AuthCalcPost<G> calc;
    try {
      calc = AuthCalcPost<G>::from_bytes(l.tx(*st.auth_calc).tx.payload);
    } catch (const EncodingError&) {
      return uphold("final-answer post is malformed");
    }
    std::map<std::uint64_t, ResponseTuple<G>> accepted;
    for (const auto& s : screened)
      if (s.contract == ev.contract && s.verdict == Verdict::Accepted) accepted.emplace(s.seq, *s.tuple);
    if (auto d = calc_defect(env, spec, calc, accepted)) return uphold(*d);

    std::optional<QualityPost<G>> post;
    for (auto seq : st.quality_posts) {
      try {
        auto q = QualityPost<G>::from_bytes(l.tx(seq).tx.payload);
        if (q.response == ev.response) post = q;
      } catch (const EncodingError&) {
      }
    }
    if (!post) return uphold("no quality post for the response");
    if (auto d = post_defect(env, spec, calc, ev.tuple, *post)) return uphold(*d);

    Wei received = 0;
    for (const auto& t : l.transactions())
      if (t.tx.contract == ev.contract && t.status == ledger::TxStatus::Ok && t.tx.recipient == ev.address &&
          (t.tx.method == Method::WorkerPayment || t.tx.method == Method::Refund))
        received += t.moved;
    if (received < entitlement(spec, calc, *post, rtx.fee)) return uphold("payment missing or short");
    return dismiss("posted quality and payment check out");
  }

  crypto::KeyPair<G> keys_;
  Wallet<G> wallet_;
  crypto::Drbg rng_;
  std::set<Digest> registry_;
};

}  // namespace avecq::protocol
