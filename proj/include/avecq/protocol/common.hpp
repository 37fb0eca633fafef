#pragma once

#include "avecq/ledger/ledger.hpp"
#include "avecq/protocol/messages.hpp"

namespace avecq::protocol {

using ledger::AccountId;
using ledger::ContractId;
using ledger::Ledger;
using ledger::Method;
using ledger::Receipt;
using ledger::TaskSpec;

/// Public material every party (and the auditor) works from.
template <PrimeOrderGroup G>
struct Environment {
  relations::BackendParameters<G> backend;
  Element<G> pk_ra;

  Digest params() const { return backend.digest(); }
};

/// A ledger account plus the key that signs for it.
template <PrimeOrderGroup G>
struct Wallet {
  crypto::KeyPair<G> keys;
  AccountId id = 0;
  Wei priority_fee = kGwei;

  static Wallet open(Ledger<G>& l, crypto::Drbg& rng, Wei balance) {
    Wallet w;
    w.keys = crypto::keygen<G>(rng);
    w.id = l.open_account(w.keys.pk, balance);
    return w;
  }

  Receipt send(Ledger<G>& l, Method m, ContractId c, Bytes payload = {}, Wei amount = 0,
               AccountId recipient = 0) const {
    ledger::Transaction<G> tx;
    tx.method = m;
    tx.sender = id;
    tx.contract = c;
    tx.nonce = l.next_nonce(id);
    tx.priority_fee = priority_fee;
    tx.amount = amount;
    tx.recipient = recipient;
    tx.payload = std::move(payload);
    tx.sign(keys.sk);
    return l.submit(tx);
  }
};

/// The task's spec, or ProtocolError if the contract has none yet.
template <PrimeOrderGroup G>
const TaskSpec<G>& task_spec(const Ledger<G>& l, ContractId c) {
  const auto& st = l.read(c);
  if (!st.spec) throw ProtocolError("contract " + std::to_string(c) + " has no task");
  return *st.spec;
}

}  // namespace avecq::protocol
