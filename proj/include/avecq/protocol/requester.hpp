#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "avecq/protocol/audit.hpp"

namespace avecq::protocol {

/// Deliberate deviations, keyed by the response seq they target.
struct Misbehavior {
  std::set<std::uint64_t> omit;  // no post, no payment
  std::set<std::uint64_t> flip;  // post the opposite increment with the honest proof
};

/// One detection raised while screening responses.
struct Detection {
  std::uint64_t seq;
  Verdict verdict;
  std::optional<std::uint64_t> conflicts_with;
};

struct WorkerSettlement {
  std::uint64_t response = 0;
  std::uint32_t answer = 0;
  AccountId address = 0;
  std::optional<bool> correct;  // empty on a void task
  Wei payment = 0;
  std::optional<std::uint64_t> leaf_position;
};

template <PrimeOrderGroup G>
struct ProcessingBundle {
  bool is_void = false;
  std::optional<policy::FinalAnswer> final_answer;
  std::vector<std::uint32_t> answers;  // plaintexts of the surviving responses, in order
  std::vector<WorkerSettlement> workers;
  std::vector<Detection> detections;
  std::vector<Receipt> receipts;
  std::size_t proofs = 0;
};

template <PrimeOrderGroup G>
class RequesterAgent {
 public:
  RequesterAgent(const relations::AttestationBackend<G>& backend, Environment<G> env, Wallet<G> wallet,
                 crypto::KeyPair<G> task_keys, crypto::Drbg rng)
      : backend_(&backend),
        env_(std::move(env)),
        wallet_(std::move(wallet)),
        keys_(std::move(task_keys)),
        rng_(std::move(rng)) {}

  const Wallet<G>& wallet() const { return wallet_; }
  const Element<G>& pk() const { return keys_.pk; }
  Misbehavior& misbehavior() { return misbehavior_; }

  Receipt deploy(Ledger<G>& l) { return wallet_.send(l, Method::Deploy, 0); }

  Receipt create_task(Ledger<G>& l, ContractId c, TaskSpec<G> spec) {
    spec.pk_r = keys_.pk;
    spec.validate();
    return wallet_.send(l, Method::CreateTask, c, spec.to_bytes(), spec.budget);
  }

  /// Screens, decrypts and scores the responses, appends the new leaves and
  /// submits the final answer, quality posts and payments (or the void
  /// bundle when too few responses survive).
  ProcessingBundle<G> process(Ledger<G>& l, ContractId c) {
    const auto& spec = task_spec(l, c);
    if (l.block() < spec.deadlines.response) throw ProtocolError("response deadline has not passed");
    if (!processed_.insert(c).second) throw ProtocolError("task already processed");

    ProcessingBundle<G> out;
    std::vector<ScreenedResponse<G>> survivors;
    for (auto& s : screen_ledger(env_, l)) {
      if (s.contract != c) continue;
      if (s.verdict == Verdict::Accepted) survivors.push_back(std::move(s));
      else out.detections.push_back({s.seq, s.verdict, s.conflicts_with});
    }

    struct Opened {
      std::uint32_t answer;
      AccountId address;
      BlindKey rk;
    };
    std::vector<Opened> opened;
    for (const auto& s : survivors) {
      const auto& t = *s.tuple;
      Opened o;
      o.answer = crypto::decrypt<G>(keys_.sk, t.answer.limbs.at(0));
      o.address = crypto::limbs_to_u32(crypto::decrypt_limbs<G>(keys_.sk, t.address));
      o.rk = crypto::limbs_to_bytes<16>(crypto::decrypt_limbs<G>(keys_.sk, t.blind));
      opened.push_back(o);
      out.answers.push_back(o.answer);
    }

    AuthCalcPost<G> calc;
    for (const auto& s : survivors) calc.responses.push_back(s.seq);
    out.is_void = survivors.size() < spec.n_th;
    calc.is_void = out.is_void;
    if (!out.is_void) {
      auto fin = policy::ans_calc(out.answers, {}, spec.policy);
      auto limbs = crypto::words_to_limbs(fin.words());
      calc.final_answer = crypto::encrypt_limbs<G>(keys_.pk, limbs, crypto::random_scalars<G>(rng_, limbs.size()));
      std::vector<EncryptedValue<G>> answers;
      for (const auto& s : survivors) answers.push_back(s.tuple->answer);
      calc.proof = backend_->prove(auth_calc_statement(env_, spec, answers, calc.final_answer),
                                   relations::RequesterKeyWitness<G>{keys_.sk});
      ++out.proofs;
      out.final_answer = fin;
    }
    out.receipts.push_back(wallet_.send(l, Method::SubmitAuthCalc, c, calc.to_bytes()));

    std::vector<std::pair<AccountId, Wei>> payouts;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      const auto& s = survivors[i];
      const auto& t = *s.tuple;
      const auto& o = opened[i];
      WorkerSettlement ws;
      ws.response = s.seq;
      ws.answer = o.answer;
      ws.address = o.address;
      if (!out.is_void) ws.correct = policy::is_correct(o.answer, *out.final_answer, spec.policy);
      if (misbehavior_.omit.count(s.seq)) {
        out.workers.push_back(ws);
        continue;
      }

      auto mu = relations::quality_increment(ws.correct);
      const ScalarPair<G> r_r{crypto::random_scalar<G>(rng_), crypto::random_scalar<G>(rng_)};
      const ScalarPair<G> r_dd{crypto::random_scalar<G>(rng_), crypto::random_scalar<G>(rng_)};
      QualityPost<G> post;
      post.response = s.seq;
      post.new_pair = t.rerandomized + crypto::commit_pair<G>(mu.first, mu.second, r_r);
      post.auth_qual = backend_->prove(auth_qual_statement(env_, spec, calc, t, post.new_pair),
                                       relations::AuthQualWitness<G>{keys_.sk, r_r});
      ++out.proofs;
      if (ws.correct.value_or(false)) {
        post.auth_value =
            backend_->prove(auth_value_statement(env_, spec, calc, t), relations::RequesterKeyWitness<G>{keys_.sk});
        ++out.proofs;
      }
      if (misbehavior_.flip.count(s.seq) && !out.is_void) {
        post.new_pair = t.rerandomized + crypto::commit_pair<G>(mu.second, mu.first, r_r);
      }
      auto leaf = post.new_pair + crypto::commit_pair<G>(0, 0, r_dd);
      auto pos = l.append_leaf(relations::quality_leaf<G>(leaf), "requester");
      ws.leaf_position = pos;

      const auto k = blind_scalar<G>(o.rk);
      post.index = blind_index(o.rk);
      post.blinded_r_r = r_r.shifted(k);
      post.blinded_r_dummy = r_dd.shifted(k);
      post.blinded_pos = static_cast<std::uint32_t>(pos) + blind_offset(o.rk);
      out.receipts.push_back(wallet_.send(l, Method::SubmitQuality, c, post.to_bytes()));

      if (out.is_void) {
        ws.payment = l.tx(s.seq).fee;  // refunded once the void post lands
      } else {
        ws.payment = policy::paym_calc(*ws.correct, spec.policy);
        payouts.emplace_back(o.address, ws.payment);
      }
      out.workers.push_back(ws);
    }
    for (auto [addr, amount] : payouts)
      out.receipts.push_back(wallet_.send(l, Method::WorkerPayment, c, {}, amount, addr));
    if (out.is_void) {
      for (const auto& ws : out.workers)
        if (!misbehavior_.omit.count(ws.response)) pending_[c].emplace_back(ws.address, ws.payment);
    }
    return out;
  }

  /// Void tasks only: expense refunds, admissible once the contract is Void.
  std::vector<Receipt> settle(Ledger<G>& l, ContractId c) {
    std::vector<Receipt> out;
    auto it = pending_.find(c);
    if (it == pending_.end()) return out;
    if (l.read(c).phase != ledger::Phase::Void) throw ProtocolError("void post not yet included");
    Wei left = l.read(c).escrow;
    for (auto [addr, amount] : it->second) {
      Wei pay = std::min(amount, left);
      if (pay == 0) continue;
      left -= pay;
      out.push_back(wallet_.send(l, Method::Refund, c, {}, pay, addr));
    }
    pending_.erase(it);
    return out;
  }

  /// Withdraws what is left once the protest window has closed.
  std::optional<Receipt> withdraw(Ledger<G>& l, ContractId c) {
    auto left = l.read(c).escrow;
    if (left == 0) return std::nullopt;
    return wallet_.send(l, Method::Refund, c, {}, left, wallet_.id);
  }

 private:
  const relations::AttestationBackend<G>* backend_;
  Environment<G> env_;
  Wallet<G> wallet_;
  crypto::KeyPair<G> keys_;
  crypto::Drbg rng_;
  Misbehavior misbehavior_;
  std::set<ContractId> processed_;
  std::map<ContractId, std::vector<std::pair<AccountId, Wei>>> pending_;
};

}  // namespace avecq::protocol
