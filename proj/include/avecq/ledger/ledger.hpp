#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "avecq/crypto/drbg.hpp"
#include "avecq/crypto/schnorr.hpp"
#include "avecq/ledger/fees.hpp"
#include "avecq/ledger/task_spec.hpp"
#include "avecq/merkle/merkle_tree.hpp"

namespace avecq::ledger {

using AccountId = std::uint32_t;
using ContractId = std::uint32_t;

enum class Phase : std::uint8_t { Pending = 0, Created, Collecting, Processing, Finalized, Void };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Pending: return "Pending";
    case Phase::Created: return "Created";
    case Phase::Collecting: return "Collecting";
    case Phase::Processing: return "Processing";
    case Phase::Finalized: return "Finalized";
    case Phase::Void: return "Void";
  }
  return "?";
}

/// First payload byte of SubmitAuthCalc.
enum class AuthCalcKind : std::uint8_t { Final = 0, Void = 1 };

template <crypto::PrimeOrderGroup G>
struct Transaction {
  Method method = Method::Deploy;
  AccountId sender = 0;
  ContractId contract = 0;  // ignored (signed as 0) for Deploy
  std::uint64_t nonce = 0;
  Wei priority_fee = 0;
  Wei amount = 0;  // CreateTask deposit, or the value moved out of escrow
  AccountId recipient = 0;
  Bytes payload;
  crypto::Signature<G> signature;

  Bytes signing_bytes() const {
    ByteWriter w;
    w.u8(kEncodingVersion)
        .u8(static_cast<std::uint8_t>(method))
        .u32(sender)
        .u32(method == Method::Deploy ? 0 : contract)
        .u64(nonce)
        .u64(priority_fee)
        .u64(amount)
        .u32(recipient)
        .blob(payload);
    return std::move(w).bytes();
  }
  void sign(const crypto::Scalar<G>& sk) { signature = crypto::sign<G>(sk, signing_bytes()); }
};

enum class TxStatus : std::uint8_t { Ok, Reverted };

template <crypto::PrimeOrderGroup G>
struct IncludedTx {
  std::uint64_t seq = 0;
  std::uint64_t submission = 0;
  Transaction<G> tx;
  std::uint64_t tick = 0;   // block height at submission
  std::uint64_t block = 0;  // inclusion block
  std::uint64_t gas = 0;
  Wei fee = 0;
  Wei moved = 0;  // value actually transferred
  TxStatus status = TxStatus::Ok;
  std::string error;
  Wei escrow_after = 0;
};

struct Receipt {
  std::uint64_t submission = 0;
  std::uint64_t inclusion_block = 0;
  Wei fee = 0;
  ContractId contract = 0;
};

template <crypto::PrimeOrderGroup G>
struct Account {
  crypto::Element<G> pk;
  Wei balance = 0;
  std::uint64_t nonce = 0;
};

template <crypto::PrimeOrderGroup G>
struct ContractState {
  ContractId id = 0;
  AccountId owner = 0;
  Phase phase = Phase::Pending;
  std::optional<TaskSpec<G>> spec;
  Wei escrow = 0;
  Wei deposited = 0;
  Wei paid = 0;
  Wei refunded = 0;
  Wei confiscated = 0;
  Wei reserved = 0;  // pending outflows
  std::vector<std::uint64_t> responses;  // seqs, in inclusion order
  std::vector<std::uint64_t> quality_posts;
  std::vector<std::uint64_t> payments;
  std::vector<std::uint64_t> refunds;
  std::optional<std::uint64_t> auth_calc;
};

/// Simulated chain plus the per-task CSTask contracts. Transactions are
/// admitted at the current block, included after a sampled latency, and
/// applied in (block, tick, sender, nonce) order. The global Merkle tree of
/// quality leaves lives here too, so that its writes are serialized with
/// everything else.
template <crypto::PrimeOrderGroup G>
class Ledger {
 public:
  Ledger(std::uint64_t seed, FeeParams fees, GasSchedule gas, std::size_t tree_depth = merkle::MerkleTree::kDefaultDepth)
      : rng_(crypto::Drbg(seed).fork("ledger")), fees_(std::move(fees)), gas_(gas), tree_(tree_depth) {
    gas_.validate();
    published_roots_.insert(tree_.root());
  }

  const FeeParams& fees() const { return fees_; }
  const GasSchedule& gas() const { return gas_; }
  std::uint64_t block() const { return block_; }

  AccountId open_account(const crypto::Element<G>& pk, Wei balance) {
    auto id = static_cast<AccountId>(accounts_.size());
    accounts_.push_back({pk, balance, 0});
    note({{"type", "account"}, {"id", id}, {"pk", to_hex(pk.to_bytes())}, {"balance", balance}, {"block", block_}});
    return id;
  }
  const Account<G>& account(AccountId id) const {
    if (id >= accounts_.size()) throw LedgerError("unknown account " + std::to_string(id));
    return accounts_[id];
  }
  Wei balance(AccountId id) const { return account(id).balance; }
  std::uint64_t next_nonce(AccountId id) const { return account(id).nonce; }
  std::size_t account_count() const { return accounts_.size(); }

  /// The account allowed to Confiscate (the RA).
  void set_arbiter(AccountId id) {
    account(id);
    arbiter_ = id;
  }

  const ContractState<G>& read(ContractId id) const {
    if (id >= contracts_.size()) throw LedgerError("unknown contract " + std::to_string(id));
    return contracts_[id];
  }
  std::size_t contract_count() const { return contracts_.size(); }

  /// Admission: checks signature, nonce, funds and the method against the
  /// current contract state, charges the fee and schedules inclusion.
  Receipt submit(const Transaction<G>& tx_in) {
    Transaction<G> tx = tx_in;
    auto& acct = mutable_account(tx.sender);
    if (!crypto::verify_sig<G>(acct.pk, tx.signing_bytes(), tx.signature))
      throw LedgerError("bad transaction signature");
    if (tx.nonce != acct.nonce) throw LedgerError("stale or future nonce");

    const std::uint64_t gas = gas_.gas(tx.method);
    const Wei fee = fee_wei(gas, fees_.base_fee, tx.priority_fee);
    const Wei deposit = tx.method == Method::CreateTask ? tx.amount : 0;
    if (acct.balance < checked_add(fee, deposit)) throw InsufficientFunds("sender cannot cover fee and value");

    if (tx.method == Method::Deploy) {
      tx.contract = static_cast<ContractId>(contracts_.size());
      ContractState<G> c;
      c.id = tx.contract;
      c.owner = tx.sender;
      contracts_.push_back(c);
    } else {
      auto err = admissible(tx, contract_mut(tx.contract), block_, /*at_inclusion=*/false);
      if (err) err->raise();
    }

    Wei outflow = outflow_of(tx);
    if (outflow > 0) contract_mut(tx.contract).reserved += outflow;

    acct.balance -= fee + deposit;
    acct.nonce += 1;

    auto latency_rng = rng_.fork("latency", block_).fork("sender", tx.sender).fork("nonce", tx.nonce);
    std::uint64_t inclusion = block_ + fees_.latency.sample(to_gwei(tx.priority_fee), latency_rng);

    Receipt receipt{next_submission_++, inclusion, fee, tx.contract};
    pending_.push_back({receipt.submission, std::move(tx), block_, inclusion, gas, fee});
    return receipt;
  }

  /// Moves logical time forward, applying deadline transitions and then the
  /// transactions scheduled for each new block.
  void advance(std::uint64_t blocks = 1) {
    for (std::uint64_t i = 0; i < blocks; ++i) {
      ++block_;
      for (auto& c : contracts_) apply_deadlines(c);
      include_block();
    }
  }

  std::size_t pending_count() const { return pending_.size(); }

  std::optional<std::uint64_t> seq_of(std::uint64_t submission) const {
    auto it = seq_by_submission_.find(submission);
    if (it == seq_by_submission_.end()) return std::nullopt;
    return it->second;
  }
  const IncludedTx<G>& tx(std::uint64_t seq) const {
    if (seq >= included_.size()) throw LedgerError("unknown transaction seq");
    return included_[seq];
  }
  const std::vector<IncludedTx<G>>& transactions() const { return included_; }

  /// Advances until the submission is included; returns its seq.
  std::uint64_t wait_for(const Receipt& r) {
    while (!seq_of(r.submission)) {
      if (block_ > r.inclusion_block) throw LedgerError("transaction was never included");
      advance();
    }
    return *seq_of(r.submission);
  }

  // Global quality tree. Every append publishes the new root.
  std::uint64_t append_leaf(const crypto::Digest& leaf, const std::string& by) {
    auto pos = tree_.append(leaf);
    auto root = tree_.root();
    published_roots_.insert(root);
    note({{"type", "leaf"},
          {"position", pos},
          {"leaf", leaf.hex()},
          {"root", root.hex()},
          {"by", by},
          {"block", block_}});
    return pos;
  }
  const merkle::MerkleTree& tree() const { return tree_; }
  bool is_published_root(const crypto::Digest& root) const { return published_roots_.count(root) > 0; }

  void note(nlohmann::ordered_json record) { log_.push_back(std::move(record)); }
  const std::vector<nlohmann::ordered_json>& log() const { return log_; }
  void write_log(std::ostream& out) const {
    for (const auto& r : log_) out << r.dump() << '\n';
  }

 private:
  struct Pending {
    std::uint64_t submission;
    Transaction<G> tx;
    std::uint64_t tick;
    std::uint64_t inclusion;
    std::uint64_t gas;
    Wei fee;
  };

  enum class Violation { Phase, Deadline, Escrow, Permission, Cap };
  struct Rejection {
    Violation kind;
    std::string message;
    [[noreturn]] void raise() const {
      switch (kind) {
        case Violation::Phase: throw PhaseViolation(message);
        case Violation::Deadline: throw DeadlinePassed(message);
        case Violation::Escrow: throw EscrowUnderflow(message);
        case Violation::Permission:
        case Violation::Cap: throw LedgerError(message);
      }
      throw LedgerError(message);
    }
  };

  Account<G>& mutable_account(AccountId id) {
    if (id >= accounts_.size()) throw LedgerError("unknown account " + std::to_string(id));
    return accounts_[id];
  }
  ContractState<G>& contract_mut(ContractId id) {
    if (id >= contracts_.size()) throw LedgerError("unknown contract " + std::to_string(id));
    return contracts_[id];
  }

  static Wei outflow_of(const Transaction<G>& tx) {
    switch (tx.method) {
      case Method::WorkerPayment:
      case Method::Refund: return tx.amount;
      default: return 0;
    }
  }

  /// The contract rules, evaluated at admission and again at inclusion.
  std::optional<Rejection> admissible(const Transaction<G>& tx, const ContractState<G>& c, std::uint64_t at,
                                      bool at_inclusion) const {
    auto phase_err = [&](const char* what) {
      return Rejection{Violation::Phase, std::string(to_string(tx.method)) + " not allowed in phase " +
                                             to_string(c.phase) + ": " + what};
    };
    const bool owner = tx.sender == c.owner;
    const auto* dl = c.spec ? &c.spec->deadlines : nullptr;
    const Wei available = c.escrow - (at_inclusion ? 0 : std::min(c.escrow, c.reserved));
    switch (tx.method) {
      case Method::Deploy: return std::nullopt;
      case Method::CreateTask:
        if (!owner) return Rejection{Violation::Permission, "only the deployer may create the task"};
        if (c.phase != Phase::Created) return phase_err("task already created or contract not deployed");
        return std::nullopt;
      case Method::SubmitResponse:
        if (c.phase != Phase::Collecting) {
          if (dl && at >= dl->response) return Rejection{Violation::Deadline, "response deadline passed"};
          return phase_err("task is not collecting responses");
        }
        if (at >= dl->response) return Rejection{Violation::Deadline, "response deadline passed"};
        if (at_inclusion && c.responses.size() >= c.spec->response_cap())
          return Rejection{Violation::Cap, "response cap reached"};
        return std::nullopt;
      case Method::SubmitAuthCalc:
        if (!owner) return Rejection{Violation::Permission, "only the requester may post the final answer"};
        if (c.phase != Phase::Processing) return phase_err("final answer outside processing");
        if (c.auth_calc) return phase_err("final answer already posted");
        if (at >= dl->processing) return Rejection{Violation::Deadline, "processing deadline passed"};
        return std::nullopt;
      case Method::SubmitQuality:
        if (!owner) return Rejection{Violation::Permission, "only the requester may post qualities"};
        if (c.phase != Phase::Processing && c.phase != Phase::Void) return phase_err("quality post outside processing");
        if (at >= dl->processing) return Rejection{Violation::Deadline, "processing deadline passed"};
        return std::nullopt;
      case Method::WorkerPayment:
        if (!owner) return Rejection{Violation::Permission, "only the requester may pay workers"};
        if (c.phase != Phase::Processing) return phase_err("payment outside processing");
        if (at >= dl->processing) return Rejection{Violation::Deadline, "processing deadline passed"};
        if (tx.amount > available) return Rejection{Violation::Escrow, "payment exceeds escrow"};
        return std::nullopt;
      case Method::Refund:
        if (!owner) return Rejection{Violation::Permission, "only the requester may issue refunds"};
        if (!dl) return phase_err("no task");
        if (tx.recipient == c.owner) {
          if (c.phase != Phase::Finalized && c.phase != Phase::Void) return phase_err("task still open");
          if (at < dl->protest) return Rejection{Violation::Deadline, "protest window still open"};
        } else {
          if (c.phase != Phase::Void) return phase_err("expense refunds only for void tasks");
          if (at >= dl->processing) return Rejection{Violation::Deadline, "processing deadline passed"};
        }
        if (tx.amount > available) return Rejection{Violation::Escrow, "refund exceeds escrow"};
        return std::nullopt;
      case Method::Confiscate:
        if (!arbiter_ || tx.sender != *arbiter_) return Rejection{Violation::Permission, "only the arbiter may confiscate"};
        if (c.phase != Phase::Processing && c.phase != Phase::Finalized && c.phase != Phase::Void)
          return phase_err("nothing to confiscate yet");
        return std::nullopt;
    }
    return Rejection{Violation::Permission, "unknown method"};
  }

  void apply_deadlines(ContractState<G>& c) {
    if (!c.spec) return;
    if (c.phase == Phase::Collecting && block_ >= c.spec->deadlines.response) c.phase = Phase::Processing;
    if (c.phase == Phase::Processing && block_ >= c.spec->deadlines.processing) c.phase = Phase::Finalized;
  }

  void include_block() {
    std::vector<Pending> now;
    auto split = std::stable_partition(pending_.begin(), pending_.end(),
                                       [&](const Pending& p) { return p.inclusion != block_; });
    std::move(split, pending_.end(), std::back_inserter(now));
    pending_.erase(split, pending_.end());
    std::sort(now.begin(), now.end(), [](const Pending& a, const Pending& b) {
      return std::tie(a.tick, a.tx.sender, a.tx.nonce) < std::tie(b.tick, b.tx.sender, b.tx.nonce);
    });
    for (auto& p : now) apply(std::move(p));
  }

  void apply(Pending p) {
    IncludedTx<G> inc;
    inc.seq = included_.size();
    inc.submission = p.submission;
    inc.tick = p.tick;
    inc.block = block_;
    inc.gas = p.gas;
    inc.fee = p.fee;
    auto& c = contract_mut(p.tx.contract);
    c.reserved -= std::min(c.reserved, outflow_of(p.tx));

    auto refuse = [&](std::string why) {
      inc.status = TxStatus::Reverted;
      inc.error = std::move(why);
      if (p.tx.method == Method::CreateTask) mutable_account(p.tx.sender).balance += p.tx.amount;
    };

    if (p.tx.method == Method::Deploy) {
      c.phase = Phase::Created;
    } else if (auto err = admissible(p.tx, c, block_, /*at_inclusion=*/true)) {
      refuse(err->message);
    } else {
      switch (p.tx.method) {
        case Method::CreateTask: {
          try {
            auto spec = TaskSpec<G>::from_bytes(p.tx.payload);
            spec.validate();
            if (spec.budget != p.tx.amount) throw PolicyError("deposit differs from the task budget");
            if (spec.deadlines.response <= block_) throw PolicyError("response deadline already passed");
            c.spec = std::move(spec);
            c.escrow = p.tx.amount;
            c.deposited = p.tx.amount;
            inc.moved = p.tx.amount;
            c.phase = Phase::Collecting;
          } catch (const Error& e) {
            refuse(std::string("invalid task: ") + e.what());
          }
          break;
        }
        case Method::SubmitResponse: c.responses.push_back(inc.seq); break;
        case Method::SubmitAuthCalc:
          if (p.tx.payload.empty() || p.tx.payload[0] > 1) {
            refuse("malformed final-answer payload");
            break;
          }
          c.auth_calc = inc.seq;
          if (p.tx.payload[0] == static_cast<std::uint8_t>(AuthCalcKind::Void)) c.phase = Phase::Void;
          break;
        case Method::SubmitQuality: c.quality_posts.push_back(inc.seq); break;
        case Method::WorkerPayment:
        case Method::Refund: {
          if (p.tx.amount > c.escrow) {
            refuse("escrow underflow");
            break;
          }
          auto& to = mutable_account(p.tx.recipient);
          c.escrow -= p.tx.amount;
          to.balance = checked_add(to.balance, p.tx.amount);
          inc.moved = p.tx.amount;
          if (p.tx.method == Method::WorkerPayment) {
            c.paid += p.tx.amount;
            c.payments.push_back(inc.seq);
          } else {
            c.refunded += p.tx.amount;
            c.refunds.push_back(inc.seq);
          }
          break;
        }
        case Method::Confiscate: {
          auto& to = mutable_account(p.tx.recipient);
          inc.moved = c.escrow;
          to.balance = checked_add(to.balance, c.escrow);
          c.confiscated += c.escrow;
          c.escrow = 0;
          break;
        }
        case Method::Deploy: break;
      }
    }
    inc.escrow_after = c.escrow;
    inc.tx = std::move(p.tx);
    seq_by_submission_[inc.submission] = inc.seq;
    note(record_of(inc));
    included_.push_back(std::move(inc));
  }

  nlohmann::ordered_json record_of(const IncludedTx<G>& inc) const {
    const auto& t = inc.tx;
    return {{"type", "tx"},
            {"seq", inc.seq},
            {"method", to_string(t.method)},
            {"sender", t.sender},
            {"sender_pk", to_hex(account(t.sender).pk.to_bytes())},
            {"contract", t.contract},
            {"tick", inc.tick},
            {"block", inc.block},
            {"nonce", t.nonce},
            {"gas", inc.gas},
            {"priority_fee", t.priority_fee},
            {"fee", inc.fee},
            {"amount", t.amount},
            {"moved", inc.moved},
            {"recipient", t.recipient},
            {"status", inc.status == TxStatus::Ok ? "ok" : "reverted"},
            {"error", inc.error},
            {"escrow_after", inc.escrow_after},
            {"payload", to_hex(t.payload)},
            {"signature", to_hex(t.signature.to_bytes())}};
  }

  crypto::Drbg rng_;
  FeeParams fees_;
  GasSchedule gas_;
  merkle::MerkleTree tree_;
  std::set<crypto::Digest> published_roots_;
  std::uint64_t block_ = 0;
  std::vector<Account<G>> accounts_;
  std::vector<ContractState<G>> contracts_;
  std::optional<AccountId> arbiter_;
  std::vector<Pending> pending_;
  std::vector<IncludedTx<G>> included_;
  std::map<std::uint64_t, std::uint64_t> seq_by_submission_;
  std::uint64_t next_submission_ = 0;
  std::vector<nlohmann::ordered_json> log_;
};

}  // namespace avecq::ledger
