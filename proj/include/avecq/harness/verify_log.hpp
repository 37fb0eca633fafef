#pragma once

#include <deque>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "avecq/crypto/ristretto255.hpp"
#include "avecq/crypto/small_group.hpp"
#include "avecq/protocol/protocol.hpp"

namespace avecq::harness {

using crypto::Digest;
using crypto::Element;
using crypto::PrimeOrderGroup;

/// Outcome of an offline audit. `failures` is empty iff `ok`.
struct AuditResult {
  bool ok = true;
  std::vector<std::string> failures;
  std::size_t transactions = 0;
  std::size_t contracts = 0;
  std::size_t proofs_verified = 0;
  std::size_t confiscations = 0;

  void fail(std::string why) {
    ok = false;
    if (failures.size() < 64) failures.push_back(std::move(why));
  }
  nlohmann::ordered_json to_json() const {
    return {{"ok", ok},
            {"transactions", transactions},
            {"contracts", contracts},
            {"proofs_verified", proofs_verified},
            {"confiscations", confiscations},
            {"failures", failures}};
  }
};

namespace audit_detail {

using json = nlohmann::ordered_json;
using ledger::Method;

template <PrimeOrderGroup G>
struct ContractView {
  ledger::AccountId owner = 0;
  std::optional<ledger::TaskSpec<G>> spec;
  Wei escrow = 0, deposited = 0, paid = 0, refunded = 0, confiscated = 0;
  Wei expense_refunds = 0;  // refunds to someone other than the owner
  std::optional<std::pair<std::uint64_t, Bytes>> calc;
  std::vector<std::pair<std::uint64_t, Bytes>> posts;
  std::map<std::uint64_t, Wei> response_fee;
  bool seized = false;
};

template <PrimeOrderGroup G>
class Auditor {
 public:
  AuditResult run(const std::vector<json>& records) {
    if (records.empty() || records.front().value("type", "") != "header") {
      res_.fail("log does not start with a header record");
      return res_;
    }
    try {
      read_header(records.front());
    } catch (const std::exception& e) {
      res_.fail(std::string("bad header: ") + e.what());
      return res_;
    }
    bool closed = false;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& r = records[i];
      const std::string where = "record " + std::to_string(i);
      try {
        auto type = r.at("type").get<std::string>();
        if (closed) res_.fail(where + ": data after the close record");
        if (type == "account") on_account(r, where);
        else if (type == "leaf") on_leaf(r, where);
        else if (type == "tx") on_tx(r, where);
        else if (type == "close") {
          on_close(r, where);
          closed = true;
        } else if (type != "ruling") res_.fail(where + ": unknown record type '" + type + "'");
      } catch (const std::exception& e) {
        res_.fail(where + ": " + e.what());
      }
    }
    if (!closed) res_.fail("log has no close record");
    audit_protocol();
    res_.contracts = contracts_.size();
    return res_;
  }

 private:
  void read_header(const json& h) {
    if (h.at("group").get<std::string>() != G::kName) throw ConfigError("group mismatch");
    env_.backend = relations::BackendParameters<G>::from_json(h.at("backend"));
    env_.pk_ra = element(h.at("pk_ra"));
    base_fee_ = h.at("fees").at("base_fee_wei").get<Wei>();
    gas_ = ledger::GasSchedule::from_json(h.at("gas"));
    arbiter_ = h.at("arbiter").get<ledger::AccountId>();
    tree_ = merkle::MerkleTree(h.at("tree_depth").get<std::size_t>());
    roots_.insert(tree_.root());
  }

  static Element<G> element(const json& j) {
    auto e = Element<G>::from_canonical(from_hex(j.get<std::string>()));
    if (!e) throw EncodingError("not a group element");
    return *e;
  }

  void on_account(const json& r, const std::string& where) {
    if (r.at("id").get<std::size_t>() != accounts_.size()) res_.fail(where + ": account ids out of order");
    accounts_.push_back(element(r.at("pk")));
    bal_.push_back(r.at("balance").get<Wei>());
  }

  void on_leaf(const json& r, const std::string& where) {
    if (r.at("position").get<std::uint64_t>() != tree_.size()) res_.fail(where + ": leaf position out of order");
    tree_.append(Digest::from_hex(r.at("leaf").get<std::string>()));
    if (tree_.root().hex() != r.at("root").get<std::string>()) res_.fail(where + ": published root does not match");
    roots_.insert(tree_.root());
    if (r.at("by").get<std::string>() == "requester") ++requester_leaves_;
  }

  ledger::AccountId acct_id(ledger::AccountId id) const {
    if (id >= accounts_.size()) throw LedgerError("unknown account " + std::to_string(id));
    return id;
  }

  void on_tx(const json& r, const std::string& where) {
    ledger::Transaction<G> tx;
    tx.method = ledger::method_from_string(r.at("method").get<std::string>());
    tx.sender = r.at("sender").get<ledger::AccountId>();
    tx.contract = r.at("contract").get<ledger::ContractId>();
    tx.nonce = r.at("nonce").get<std::uint64_t>();
    tx.priority_fee = r.at("priority_fee").get<Wei>();
    tx.amount = r.at("amount").get<Wei>();
    tx.recipient = r.at("recipient").get<ledger::AccountId>();
    tx.payload = from_hex(r.at("payload").get<std::string>());
    {
      auto raw = from_hex(r.at("signature").get<std::string>());
      ByteReader br(raw);
      tx.signature = crypto::Signature<G>::read(br);
      br.expect_end();
    }
    const auto seq = r.at("seq").get<std::uint64_t>();
    const auto block = r.at("block").get<std::uint64_t>();
    const auto tick = r.at("tick").get<std::uint64_t>();
    const auto gas = r.at("gas").get<std::uint64_t>();
    const auto fee = r.at("fee").get<Wei>();
    const auto moved = r.at("moved").get<Wei>();
    const bool ok = r.at("status").get<std::string>() == "ok";
    if (!ok && r.at("status").get<std::string>() != "reverted") res_.fail(where + ": unknown status");

    if (seq != res_.transactions) res_.fail(where + ": seq out of order");
    ++res_.transactions;
    const auto& sender_pk = accounts_.at(acct_id(tx.sender));
    if (to_hex(sender_pk.to_bytes()) != r.at("sender_pk").get<std::string>())
      res_.fail(where + ": sender_pk differs from the account key");
    if (!crypto::verify_sig<G>(sender_pk, tx.signing_bytes(), tx.signature))
      res_.fail(where + ": signature does not verify");
    if (!nonces_[tx.sender].insert(tx.nonce).second) res_.fail(where + ": nonce reused");
    if (gas != gas_.gas(tx.method)) res_.fail(where + ": gas differs from the schedule");
    if (fee != ledger::fee_wei(gas, base_fee_, tx.priority_fee)) res_.fail(where + ": fee differs from gas x price");
    if (tick >= block) res_.fail(where + ": included no later than submitted");
    auto order = std::tuple{block, tick, tx.sender, tx.nonce};
    if (last_order_ && std::get<0>(*last_order_) == block && order < *last_order_)
      res_.fail(where + ": block ordering violated");
    if (last_order_ && block < std::get<0>(*last_order_)) res_.fail(where + ": blocks go backwards");
    last_order_ = order;

    // Fees are charged at admission, so replayed balances may dip below zero
    // between records; only the close record is compared.
    bal_[tx.sender] -= fee;

    if (tx.method == Method::Deploy) {
      if (contracts_.count(tx.contract)) res_.fail(where + ": contract deployed twice");
      contracts_[tx.contract].owner = tx.sender;
      check_escrow(r, contracts_[tx.contract], where);
      return;
    }
    auto it = contracts_.find(tx.contract);
    if (it == contracts_.end()) throw LedgerError("transaction to an undeployed contract");
    auto& c = it->second;
    if (!ok) {
      if (moved != 0) res_.fail(where + ": reverted transaction moved value");
      check_escrow(r, c, where);
      return;
    }
    apply(tx, c, block, seq, fee, moved, where);
    check_escrow(r, c, where);
  }

  void apply(const ledger::Transaction<G>& tx, ContractView<G>& c, std::uint64_t block, std::uint64_t seq, Wei fee,
             Wei moved, const std::string& where) {
    const bool owner = tx.sender == c.owner;
    const auto* dl = c.spec ? &c.spec->deadlines : nullptr;
    auto need = [&](bool cond, const char* what) {
      if (!cond) res_.fail(where + ": " + ledger::to_string(tx.method) + " " + what);
      return cond;
    };
    switch (tx.method) {
      case Method::Deploy: break;
      case Method::CreateTask: {
        need(owner, "by someone other than the deployer");
        need(!c.spec, "on a contract that already has a task");
        auto spec = ledger::TaskSpec<G>::from_bytes(tx.payload);
        spec.validate();
        need(spec.budget == tx.amount, "deposit differs from the budget");
        need(spec.deadlines.response > block, "after its own response deadline");
        need(moved == tx.amount, "moved differs from the deposit");
        bal_[tx.sender] -= tx.amount;
        c.escrow = c.deposited = tx.amount;
        c.spec = std::move(spec);
        break;
      }
      case Method::SubmitResponse: {
        if (!need(dl != nullptr, "before the task exists")) break;
        need(block < dl->response, "after the response deadline");
        bool root_ok = false;
        try {
          root_ok = roots_.count(protocol::ResponseTuple<G>::from_bytes(tx.payload).mt_root) > 0;
        } catch (const EncodingError&) {
        }
        payloads_.push_back(tx.payload);
        responses_.push_back({seq, tx.contract, payloads_.back(), root_ok});
        c.response_fee[seq] = fee;
        break;
      }
      case Method::SubmitAuthCalc:
        if (!need(dl != nullptr, "before the task exists")) break;
        need(owner, "by someone other than the requester");
        need(block >= dl->response && block < dl->processing, "outside the processing window");
        need(!c.calc, "posted twice");
        if (!c.calc) c.calc = {seq, tx.payload};
        break;
      case Method::SubmitQuality:
        if (!need(dl != nullptr, "before the task exists")) break;
        need(owner, "by someone other than the requester");
        need(block >= dl->response && block < dl->processing, "outside the processing window");
        c.posts.emplace_back(seq, tx.payload);
        break;
      case Method::WorkerPayment:
      case Method::Refund: {
        if (!need(dl != nullptr, "before the task exists")) break;
        need(owner, "by someone other than the requester");
        const bool is_void = c.calc && !c.calc->second.empty() && c.calc->second[0] == 1;
        if (tx.method == Method::WorkerPayment) {
          need(!is_void, "on a void task");
          need(block >= dl->response && block < dl->processing, "outside the processing window");
        } else if (tx.recipient == c.owner) {
          need(block >= dl->protest, "before the protest window closed");
        } else {
          need(is_void && block < dl->processing, "expense refund outside a void task's processing window");
        }
        need(moved == tx.amount, "moved differs from the amount");
        if (!need(tx.amount <= c.escrow, "exceeds the escrow")) break;
        c.escrow -= tx.amount;
        bal_.at(acct_id(tx.recipient)) += tx.amount;
        if (tx.method == Method::WorkerPayment) c.paid += tx.amount;
        else c.refunded += tx.amount;
        if (tx.method == Method::Refund && tx.recipient != c.owner) c.expense_refunds += tx.amount;
        break;
      }
      case Method::Confiscate:
        need(tx.sender == arbiter_, "by someone other than the arbiter");
        need(moved == c.escrow, "did not move the whole escrow");
        bal_.at(acct_id(tx.recipient)) += c.escrow;
        c.confiscated += c.escrow;
        c.escrow = 0;
        c.seized = true;
        ++res_.confiscations;
        break;
    }
  }

  void check_escrow(const json& r, const ContractView<G>& c, const std::string& where) {
    if (r.at("escrow_after").get<Wei>() != c.escrow) res_.fail(where + ": escrow_after does not match the replay");
    if (c.deposited != c.paid + c.refunded + c.confiscated + c.escrow) res_.fail(where + ": escrow not conserved");
  }

  void on_close(const json& r, const std::string& where) {
    const auto& balances = r.at("balances");
    if (balances.size() != accounts_.size()) {
      res_.fail(where + ": close record lists the wrong number of accounts");
      return;
    }
    for (std::size_t i = 0; i < accounts_.size(); ++i)
      if (static_cast<__int128>(balances[i].template get<Wei>()) != bal_[i])
        res_.fail(where + ": final balance of account " + std::to_string(i) + " does not match the replay");
    const auto& escrows = r.at("escrows");
    for (const auto& [id, c] : contracts_)
      if (id >= escrows.size() || escrows[id].template get<Wei>() != c.escrow)
        res_.fail(where + ": final escrow of contract " + std::to_string(id) + " does not match the replay");
  }

  /// Re-screens every response and re-verifies the requester's posts.
  void audit_protocol() {
    auto screened = protocol::screen_responses<G>(env_, responses_, [&](ledger::ContractId id) {
      auto it = contracts_.find(id);
      return it == contracts_.end() || !it->second.spec ? nullptr : &*it->second.spec;
    });
    std::map<ledger::ContractId, std::map<std::uint64_t, protocol::ResponseTuple<G>>> accepted;
    for (const auto& s : screened) {
      if (s.verdict != protocol::Verdict::ProofRejected && s.verdict != protocol::Verdict::Malformed &&
          s.verdict != protocol::Verdict::UnknownRoot)
        ++res_.proofs_verified;
      if (s.verdict == protocol::Verdict::Accepted) accepted[s.contract].emplace(s.seq, *s.tuple);
    }

    std::size_t posts_total = 0;
    for (const auto& [id, c] : contracts_) {
      posts_total += c.posts.size();
      if (!c.spec) continue;
      const std::string where = "contract " + std::to_string(id);
      // Misbehaviour is tolerated only where the arbiter already confiscated.
      auto flaw = [&](const std::string& why) {
        if (!c.seized) res_.fail(where + ": " + why);
      };
      const auto& acc = accepted[id];
      if (!c.calc) {
        if (!acc.empty() && last_block() >= c.spec->deadlines.processing) flaw("no final answer was posted");
        if (!c.posts.empty()) flaw("quality posts without a final answer");
        continue;
      }
      protocol::AuthCalcPost<G> calc;
      try {
        calc = protocol::AuthCalcPost<G>::from_bytes(c.calc->second);
      } catch (const EncodingError& e) {
        flaw(std::string("final-answer post does not decode: ") + e.what());
        continue;
      }
      if (auto d = protocol::calc_defect(env_, *c.spec, calc, acc)) flaw(*d);
      else if (!calc.is_void) ++res_.proofs_verified;
      std::set<std::uint64_t> counted(calc.responses.begin(), calc.responses.end());
      if (counted.size() != calc.responses.size()) flaw("final answer counts a response twice");
      for (const auto& [seq, t] : acc)
        if (!counted.count(seq)) flaw("accepted response " + std::to_string(seq) + " left out of the final answer");

      Wei owed = 0;
      std::set<std::uint64_t> posted;
      for (const auto& [pseq, bytes] : c.posts) {
        protocol::QualityPost<G> post;
        try {
          post = protocol::QualityPost<G>::from_bytes(bytes);
        } catch (const EncodingError& e) {
          flaw("quality post " + std::to_string(pseq) + " does not decode: " + e.what());
          continue;
        }
        auto t = acc.find(post.response);
        if (t == acc.end() || !counted.count(post.response)) {
          flaw("quality post " + std::to_string(pseq) + " names an uncounted response");
          continue;
        }
        if (!posted.insert(post.response).second) flaw("response " + std::to_string(post.response) + " posted twice");
        if (auto d = protocol::post_defect(env_, *c.spec, calc, t->second, post)) {
          flaw("quality post " + std::to_string(pseq) + ": " + *d);
          continue;
        }
        res_.proofs_verified += 1 + (post.auth_value ? 1 : 0);
        owed += protocol::entitlement(*c.spec, calc, post, c.response_fee.at(post.response));
      }
      for (auto seq : counted)
        if (!posted.count(seq)) flaw("no quality post for response " + std::to_string(seq));
      const Wei settled = calc.is_void ? c.expense_refunds : c.paid;
      if (settled != owed)
        flaw("settled " + std::to_string(settled) + " wei against " + std::to_string(owed) + " wei owed");
    }
    if (posts_total != requester_leaves_) res_.fail("requester leaves do not match the quality posts");
  }

  std::uint64_t last_block() const { return last_order_ ? std::get<0>(*last_order_) : 0; }

  AuditResult res_;
  protocol::Environment<G> env_;
  Wei base_fee_ = 0;
  ledger::GasSchedule gas_;
  ledger::AccountId arbiter_ = 0;
  merkle::MerkleTree tree_{1};
  std::set<Digest> roots_;
  std::size_t requester_leaves_ = 0;
  std::vector<Element<G>> accounts_;
  std::vector<__int128> bal_;
  std::map<ledger::AccountId, std::set<std::uint64_t>> nonces_;
  std::map<ledger::ContractId, ContractView<G>> contracts_;
  std::deque<Bytes> payloads_;  // backs the views in responses_
  std::vector<protocol::ResponseInput> responses_;
  std::optional<std::tuple<std::uint64_t, std::uint64_t, ledger::AccountId, std::uint64_t>> last_order_;
};

}  // namespace audit_detail

template <PrimeOrderGroup G>
AuditResult verify_log(const std::vector<nlohmann::ordered_json>& records) {
  return audit_detail::Auditor<G>().run(records);
}

/// Reads a line-delimited log and audits it under the group its header
/// names. Lines that are not JSON count as failures.
inline AuditResult verify_log(std::istream& in) {
  std::vector<nlohmann::ordered_json> records;
  AuditResult bad;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      bad.fail("line " + std::to_string(n) + ": not a JSON object");
      continue;
    }
    records.push_back(std::move(j));
  }
  if (!bad.ok) return bad;
  std::string group;
  if (!records.empty() && records.front().contains("group") && records.front()["group"].is_string())
    group = records.front()["group"].get<std::string>();
  if (group == crypto::Ristretto255::kName) return verify_log<crypto::Ristretto255>(records);
  if (group == crypto::SmallPrimeGroup::kName) return verify_log<crypto::SmallPrimeGroup>(records);
  bad.fail("header names no known group");
  return bad;
}

}  // namespace avecq::harness
