#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>

#include "avecq/protocol/registration_authority.hpp"

namespace avecq::protocol {

/// Randomness and openings a worker keeps for one task.
template <PrimeOrderGroup G>
struct TaskSecrets {
  std::uint32_t answer = 0;
  std::vector<Scalar<G>> answer_rand;
  Wallet<G> pay;  // fresh payment address
  std::vector<Scalar<G>> address_rand;
  ScalarPair<G> r_star;
  BlindKey rk{};
  ResponseTuple<G> tuple;
  Receipt receipt;
};

enum class Outcome : std::uint8_t { Adopted, Protest, NotParticipating };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Adopted: return "adopted";
    case Outcome::Protest: return "protest";
    case Outcome::NotParticipating: return "not_participating";
  }
  return "?";
}

template <PrimeOrderGroup G>
struct Finalization {
  Outcome outcome = Outcome::NotParticipating;
  std::string reason;
  std::pair<std::uint64_t, std::uint64_t> mu{0, 0};
  std::optional<ProtestEvidence<G>> evidence;
};

namespace detail {
template <PrimeOrderGroup G>
std::string scalar_hex(const Scalar<G>& s) {
  return to_hex(s.to_bytes());
}
template <PrimeOrderGroup G>
Scalar<G> scalar_from_hex(const nlohmann::ordered_json& j) {
  auto s = Scalar<G>::from_canonical(from_hex(j.get<std::string>()));
  if (!s) throw EncodingError("non-canonical scalar in snapshot");
  return *s;
}
template <class T>
T decode_hex(const nlohmann::ordered_json& j) {
  auto raw = from_hex(j.get<std::string>());
  ByteReader r(raw);
  auto v = T::read(r);
  r.expect_end();
  return v;
}
template <class T>
std::string encode_hex(const T& v) {
  ByteWriter w;
  v.write(w);
  return to_hex(w.bytes());
}
}  // namespace detail

template <PrimeOrderGroup G>
class WorkerAgent {
 public:
  WorkerAgent(const relations::AttestationBackend<G>& backend, Environment<G> env, Wallet<G> wallet, crypto::Drbg rng)
      : backend_(&backend), env_(std::move(env)), wallet_(std::move(wallet)), rng_(std::move(rng)) {
    m_ = crypto::random_scalar<G>(rng_);
  }

  const Scalar<G>& identifier() const { return m_; }
  const Wallet<G>& wallet() const { return wallet_; }
  const crypto::Signature<G>& cert() const { return cert_; }
  const policy::QualityState& quality() const { return quality_; }
  std::uint64_t position() const { return position_; }
  const CommitmentPair<G>& base() const { return base_; }
  const ScalarPair<G>& r_c() const { return r_c_; }
  const ScalarPair<G>& r_dummy() const { return r_dummy_; }
  CommitmentPair<G> stored_pair() const { return base_ + crypto::commit_pair<G>(0, 0, r_dummy_); }
  const TaskSecrets<G>* task(ContractId c) const {
    auto it = tasks_.find(c);
    return it == tasks_.end() ? nullptr : &it->second;
  }

  void enroll(const Registration<G>& r) {
    cert_ = r.cert;
    quality_ = r.quality;
    r_c_ = r.r_c;
    r_dummy_ = {Scalar<G>::from_u64(0), Scalar<G>::from_u64(0)};
    base_ = r.base;
    position_ = r.position;
    enrolled_ = true;
  }

  /// Builds the six-field response plus its ProveQual proof. Opens a fresh
  /// payment account on the ledger.
  ResponseTuple<G> build_response(Ledger<G>& l, ContractId c, std::uint32_t answer) {
    if (!enrolled_) throw ProtocolError("worker is not registered");
    const auto& spec = task_spec(l, c);
    if (answer >= spec.policy.choices) throw PolicyError("answer outside the task's answer set");
    if (!policy::clears_threshold(quality_, spec.policy))
      throw ThresholdNotCleared("quality " + std::to_string(quality_.alpha) + "/" +
                                std::to_string(quality_.alpha + quality_.beta) + " does not clear " +
                                spec.policy.threshold.str());
    if (tasks_.count(c)) throw ProtocolError("already responded to this task");

    TaskSecrets<G> s;
    s.answer = answer;
    s.answer_rand = crypto::random_scalars<G>(rng_, relations::kAnswerLimbs);
    s.pay = Wallet<G>::open(l, rng_, 0);
    s.address_rand = crypto::random_scalars<G>(rng_, relations::kAddressLimbs);
    s.r_star = {crypto::random_scalar<G>(rng_), crypto::random_scalar<G>(rng_)};
    s.rk = rng_.template bytes<16>();

    const auto& tree = l.tree();
    auto leaf = stored_pair();
    relations::ProveQualWitness<G> w;
    w.cert = cert_;
    w.m = m_;
    w.quality = quality_;
    w.r_c = r_c_;
    w.r_star = s.r_star;
    w.r_dummy = r_dummy_;
    w.base = base_;
    w.answer = answer;
    w.answer_rand = s.answer_rand;
    w.address = s.pay.id;
    w.address_rand = s.address_rand;
    w.path = tree.prove_membership(position_);

    auto& t = s.tuple;
    t.mt_root = tree.root();
    t.answer = crypto::encrypt_limbs<G>(spec.pk_r, crypto::Limbs{answer}, s.answer_rand);
    t.address = crypto::encrypt_limbs<G>(spec.pk_r, crypto::u32_limbs(s.pay.id), s.address_rand);
    t.rerandomized = leaf + crypto::commit_pair<G>(0, 0, s.r_star);
    t.blind = crypto::encrypt_limbs<G>(spec.pk_r, crypto::bytes_to_limbs(s.rk),
                                       crypto::random_scalars<G>(rng_, relations::kBlindLimbs));
    t.tag = relations::quality_tag<G>(leaf, m_);
    t.proof = backend_->prove(t.statement(env_.params(), spec.policy, spec.pk_r, env_.pk_ra), w);
    auto out = t;
    tasks_.emplace(c, std::move(s));
    return out;
  }

  Receipt submit_response(Ledger<G>& l, ContractId c, std::uint32_t answer) {
    auto tuple = build_response(l, c, answer);
    auto r = wallet_.send(l, Method::SubmitResponse, c, tuple.to_bytes());
    tasks_.at(c).receipt = r;
    return r;
  }

  /// Checks the requester's output for this task once processing has closed,
  /// adopting the new quality or producing protest evidence. `screened` may
  /// carry a screen_ledger result shared across workers.
  Finalization<G> finalize(const Ledger<G>& l, ContractId c,
                           const std::vector<ScreenedResponse<G>>* screened = nullptr) {
    const auto& spec = task_spec(l, c);
    if (l.block() < spec.deadlines.processing) throw ProtocolError("processing has not closed yet");
    Finalization<G> f;
    auto it = tasks_.find(c);
    if (it == tasks_.end()) return f;
    const auto& s = it->second;
    auto seq = l.seq_of(s.receipt.submission);
    if (!seq || l.tx(*seq).status != ledger::TxStatus::Ok) {
      f.reason = "response was never included";
      return f;
    }

    auto protest = [&](ClaimKind kind, std::string why, std::optional<std::uint64_t> post_seq,
                       std::optional<QualityPost<G>> post) {
      f.outcome = Outcome::Protest;
      f.reason = std::move(why);
      ProtestEvidence<G> ev;
      ev.contract = c;
      ev.claim = kind;
      ev.response = *seq;
      ev.tuple = s.tuple;
      ev.address = s.pay.id;
      ev.address_rand = s.address_rand;
      ev.post = post_seq;
      ev.posted = std::move(post);
      f.evidence = std::move(ev);
      return f;
    };

    const auto& st = l.read(c);
    if (!st.auth_calc) return protest(ClaimKind::Deprivation, "no final answer posted", std::nullopt, std::nullopt);
    AuthCalcPost<G> calc;
    try {
      calc = AuthCalcPost<G>::from_bytes(l.tx(*st.auth_calc).tx.payload);
    } catch (const EncodingError&) {
      return protest(ClaimKind::BadQuality, "final-answer post is malformed", std::nullopt, std::nullopt);
    }

    std::optional<std::uint64_t> post_seq;
    std::optional<QualityPost<G>> post;
    const auto index = blind_index(s.rk);
    for (auto q : st.quality_posts) {
      try {
        auto p = QualityPost<G>::from_bytes(l.tx(q).tx.payload);
        if (p.index == index && p.response == *seq) {
          post_seq = q;
          post = std::move(p);
          break;
        }
      } catch (const EncodingError&) {
      }
    }
    if (!post) return protest(ClaimKind::Deprivation, "no quality post for this response", std::nullopt, std::nullopt);

    std::map<std::uint64_t, ResponseTuple<G>> accepted;
    std::vector<ScreenedResponse<G>> own;
    if (!screened) {
      own = screen_ledger(env_, l);
      screened = &own;
    }
    for (const auto& r : *screened)
      if (r.contract == c && r.verdict == Verdict::Accepted) accepted.emplace(r.seq, *r.tuple);
    if (auto d = calc_defect(env_, spec, calc, accepted)) return protest(ClaimKind::BadQuality, *d, post_seq, post);
    if (std::find(calc.responses.begin(), calc.responses.end(), *seq) == calc.responses.end())
      return protest(ClaimKind::Deprivation, "response left out of the final answer", post_seq, post);

    const auto k = blind_scalar<G>(s.rk);
    const ScalarPair<G> r_r{post->blinded_r_r.alpha - k, post->blinded_r_r.beta - k};
    const ScalarPair<G> r_dd{post->blinded_r_dummy.alpha - k, post->blinded_r_dummy.beta - k};
    const std::uint64_t pos = static_cast<std::uint32_t>(post->blinded_pos - blind_offset(s.rk));

    // Own-answer correctness hypothesis: exactly one admissible increment
    // must explain the posted pair.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> candidates;
    if (calc.is_void) candidates = {{0, 0}};
    else candidates = {{1, 0}, {0, 1}};
    std::vector<std::pair<std::uint64_t, std::uint64_t>> matches;
    for (auto mu : candidates)
      if (s.tuple.rerandomized + crypto::commit_pair<G>(mu.first, mu.second, r_r) == post->new_pair)
        matches.push_back(mu);
    if (matches.size() != 1)
      return protest(ClaimKind::BadQuality, "posted pair matches no admissible increment", post_seq, post);
    const auto mu = matches.front();
    if (auto d = post_defect(env_, spec, calc, s.tuple, *post)) return protest(ClaimKind::BadQuality, *d, post_seq, post);
    if ((mu.first == 1) != post->auth_value.has_value())
      return protest(ClaimKind::BadQuality, "AuthValue proof disagrees with the increment", post_seq, post);

    const auto new_leaf = post->new_pair + crypto::commit_pair<G>(0, 0, r_dd);
    if (pos >= l.tree().size() || l.tree().leaf(pos) != relations::quality_leaf<G>(new_leaf))
      return protest(ClaimKind::BadQuality, "new leaf is not in the tree at the posted position", post_seq, post);

    Wei received = 0;
    for (const auto& t : l.transactions())
      if (t.tx.contract == c && t.status == ledger::TxStatus::Ok && t.tx.recipient == s.pay.id &&
          (t.tx.method == Method::WorkerPayment || t.tx.method == Method::Refund))
        received += t.moved;
    if (received < entitlement(spec, calc, *post, l.tx(*seq).fee))
      return protest(ClaimKind::Deprivation, "payment missing or short", post_seq, post);

    quality_.alpha += mu.first;
    quality_.beta += mu.second;
    r_c_ = r_c_ + s.r_star + r_r + r_dd;
    base_ = post->new_pair;
    r_dummy_ = r_dd;
    position_ = pos;
    if (!crypto::open_check_pair<G>(stored_pair(), quality_.alpha, quality_.beta, r_c_))
      throw ProtocolError("adopted commitment does not open");
    f.outcome = Outcome::Adopted;
    f.mu = mu;
    return f;
  }

  /// Credentials and current quality opening; per-task logs are not included.
  nlohmann::ordered_json snapshot() const {
    return {{"m", detail::scalar_hex<G>(m_)},
            {"cert", detail::encode_hex(cert_)},
            {"alpha", quality_.alpha},
            {"beta", quality_.beta},
            {"r_c", detail::encode_hex(r_c_)},
            {"r_dummy", detail::encode_hex(r_dummy_)},
            {"base", detail::encode_hex(base_)},
            {"position", position_}};
  }
  void restore(const nlohmann::ordered_json& j) {
    m_ = detail::scalar_from_hex<G>(j.at("m"));
    cert_ = detail::decode_hex<crypto::Signature<G>>(j.at("cert"));
    quality_ = {j.at("alpha").get<std::uint64_t>(), j.at("beta").get<std::uint64_t>()};
    r_c_ = detail::decode_hex<ScalarPair<G>>(j.at("r_c"));
    r_dummy_ = detail::decode_hex<ScalarPair<G>>(j.at("r_dummy"));
    base_ = detail::decode_hex<CommitmentPair<G>>(j.at("base"));
    position_ = j.at("position").get<std::uint64_t>();
    enrolled_ = true;
  }

 private:
  const relations::AttestationBackend<G>* backend_;
  Environment<G> env_;
  Wallet<G> wallet_;
  crypto::Drbg rng_;
  Scalar<G> m_;
  crypto::Signature<G> cert_;
  policy::QualityState quality_;
  ScalarPair<G> r_c_;
  ScalarPair<G> r_dummy_;
  CommitmentPair<G> base_;
  std::uint64_t position_ = 0;
  bool enrolled_ = false;
  std::map<ContractId, TaskSecrets<G>> tasks_;
};

}  // namespace avecq::protocol
