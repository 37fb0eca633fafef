#pragma once

// Minimal task driver over the agents, kept separate from the harness runner
// so the protocol tests do not depend on it.

#include <memory>
#include <vector>

#include "avecq/crypto/small_group.hpp"
#include "avecq/protocol/protocol.hpp"

namespace sim {

using namespace avecq;
using namespace avecq::protocol;

template <crypto::PrimeOrderGroup G>
struct Sim {
  explicit Sim(std::size_t workers, std::uint64_t seed = 1)
      : rng(seed),
        ledger(seed, ledger::FeeParams{}, ledger::GasSchedule{}, 12),
        backend(relations::AttestationBackend<G>::setup(as_bytes("sim-backend"))) {
    auto ra_keys = crypto::keygen<G>(rng);
    ra = std::make_unique<RegistrationAuthority<G>>(ra_keys, Wallet<G>::open(ledger, rng, kEther), rng.fork("ra"));
    ledger.set_arbiter(ra->wallet().id);
    env = {backend.parameters(), ra->pk()};
    requester = std::make_unique<RequesterAgent<G>>(backend, env, Wallet<G>::open(ledger, rng, 10 * kEther),
                                                    crypto::keygen<G>(rng), rng.fork("requester"));
    for (std::size_t i = 0; i < workers; ++i) add_worker();
  }

  WorkerAgent<G>& add_worker() {
    auto w = std::make_unique<WorkerAgent<G>>(backend, env, Wallet<G>::open(ledger, rng, kEther / 10),
                                              rng.fork("worker", crew.size()));
    w->enroll(ra->register_worker(ledger, w->identifier()));
    crew.push_back(std::move(w));
    return *crew.back();
  }

  void wait(const Receipt& r) { ledger.wait_for(r); }
  void advance_to(std::uint64_t b) {
    if (ledger.block() < b) ledger.advance(b - ledger.block());
  }

  policy::TaskPolicy policy(policy::AnswerRule rule = policy::AnswerRule::MostFrequent, std::uint32_t choices = 2,
                            policy::Fraction threshold = {0, 1}) {
    policy::TaskPolicy p;
    p.rule = rule;
    p.choices = choices;
    p.threshold = threshold;
    p.p_correct = kEther / 100;
    p.p_incorrect = kEther / 250;
    return p;
  }

  /// Deploys and creates a task; returns the contract once it is collecting.
  ContractId open_task(const policy::TaskPolicy& p, std::uint32_t n_th, Wei budget = 0) {
    auto d = requester->deploy(ledger);
    wait(d);
    TaskSpec<G> spec;
    spec.description = "task";
    for (std::uint32_t i = 0; i < p.choices; ++i) spec.answers.push_back("a" + std::to_string(i));
    spec.policy = p;
    spec.n_th = n_th;
    spec.budget = budget ? budget : (crew.size() + 8) * p.p_correct;
    spec.deadlines = {ledger.block() + 12, ledger.block() + 22, ledger.block() + 26};
    wait(requester->create_task(ledger, d.contract, spec));
    return d.contract;
  }

  std::vector<Receipt> respond(ContractId c, const std::vector<std::uint32_t>& answers) {
    std::vector<Receipt> rs;
    for (std::size_t i = 0; i < answers.size(); ++i) rs.push_back(crew[i]->submit_response(ledger, c, answers[i]));
    for (const auto& r : rs) wait(r);
    return rs;
  }

  ProcessingBundle<G> process(ContractId c) {
    advance_to(task_spec(ledger, c).deadlines.response);
    auto b = requester->process(ledger, c);
    if (b.is_void) {
      wait(b.receipts.front());
      for (const auto& r : requester->settle(ledger, c)) b.receipts.push_back(r);
    }
    for (const auto& r : b.receipts) wait(r);
    return b;
  }

  std::vector<Finalization<G>> finalize(ContractId c, std::size_t n) {
    advance_to(task_spec(ledger, c).deadlines.processing);
    std::vector<Finalization<G>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(crew[i]->finalize(ledger, c));
    return out;
  }

  crypto::Drbg rng;
  Ledger<G> ledger;
  relations::AttestationBackend<G> backend;
  Environment<G> env;
  std::unique_ptr<RegistrationAuthority<G>> ra;
  std::unique_ptr<RequesterAgent<G>> requester;
  std::vector<std::unique_ptr<WorkerAgent<G>>> crew;
};

}  // namespace sim
