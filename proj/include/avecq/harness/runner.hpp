#pragma once

#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "avecq/harness/fixture.hpp"
#include "avecq/harness/scenario.hpp"
#include "avecq/harness/verify_log.hpp"

namespace avecq::harness {

using ledger::AccountId;
using ledger::ContractId;
using ledger::Ledger;
using ledger::Method;
using ledger::Receipt;
using ledger::TaskSpec;

struct RunOutput {
  nlohmann::ordered_json report;
  std::vector<nlohmann::ordered_json> log;
  bool ok = false;
  std::vector<std::string> failed;  // names of failed invariants

  std::string report_text() const { return report.dump(2) + "\n"; }
  std::string log_text() const {
    std::string out;
    for (const auto& r : log) out += r.dump() + "\n";
    return out;
  }
};

/// Extra response-window blocks when an attacker must see an included tuple
/// before copying it.
inline constexpr std::uint64_t kAttackWindowSlack = 8;

/// Warm-ups are setup, not measured, so their windows never bind on the
/// latency tail of slow networks.
inline constexpr std::uint64_t kWarmupWindowSlack = 8;

template <PrimeOrderGroup G>
class Runner {
 public:
  using json = nlohmann::ordered_json;

  Runner(Scenario sc, Fixture fx)
      : sc_(std::move(sc)),
        fx_(std::move(fx)),
        rng_(crypto::Drbg(sc_.seed).fork("runner")),
        ledger_(sc_.seed, sc_.fees, sc_.gas, sc_.tree_depth),
        backend_(relations::AttestationBackend<G>::setup(as_bytes("avecq/backend/" + std::to_string(sc_.seed)))) {
    sc_.validate();
    if (fx_.size() < sc_.count)
      throw FixtureError("fixture has " + std::to_string(fx_.size()) + " rows for " + std::to_string(sc_.count) +
                         " workers");
    if (sc_.has(Attack::VoidTask) && sc_.has(Attack::StaleQuality))
      throw ConfigError("void-task and stale-quality cannot be combined");
    if (sc_.has(Attack::VoidTask) && sc_.count + 1 < sc_.n_th)
      throw ConfigError("void-task needs at least n_th - 1 workers");
  }

  RunOutput run() {
    setup();
    const auto t_reg = ledger_.block();
    const auto& w = crew_.back();
    json stale_snapshot;
    for (std::uint32_t r = 0; r < sc_.warmups; ++r) {
      if (sc_.has(Attack::StaleQuality) && r + 1 == sc_.warmups) stale_snapshot = w->snapshot();
      auto plan = warmup_plan();
      tasks_.push_back(run_task(plan));
      replay_quality(plan, tasks_.back());
    }
    const auto t_warm = ledger_.block();
    if (sc_.has(Attack::StaleQuality)) {
      w->restore(stale_snapshot);
      expect_.back() = w->quality();
    }
    auto plan = main_plan();
    tasks_.push_back(run_task(plan));
    replay_quality(plan, tasks_.back());
    const auto& main = tasks_.back();

    ledger_.advance(1);
    if (ledger_.pending_count() != 0) throw ProtocolError("transactions still pending at close");
    json balances = json::array(), escrows = json::array();
    for (std::size_t i = 0; i < ledger_.account_count(); ++i) balances.push_back(ledger_.balance(i));
    for (std::size_t i = 0; i < ledger_.contract_count(); ++i) escrows.push_back(ledger_.read(i).escrow);
    ledger_.note({{"type", "close"}, {"block", ledger_.block()}, {"balances", balances}, {"escrows", escrows}});

    RunOutput out;
    check_invariants(plan, main);
    out.report = report(plan, main, t_reg, t_warm);
    out.log = ledger_.log();
    out.ok = true;
    for (const auto& inv : invariants_)
      if (!inv.ok) {
        out.ok = false;
        out.failed.push_back(inv.name);
      }
    return out;
  }

 private:
  struct Plan {
    bool main = false;
    policy::TaskPolicy policy;
    std::uint32_t n_th = 1;
    Wei budget = 0;
    std::uint64_t response_window = 0;
    std::uint64_t processing_window = 0;
    std::vector<std::uint32_t> answers;  // one per responding worker, in roster order
    std::set<std::size_t> expected;      // workers whose responses should survive screening
  };

  struct TaskRun {
    ContractId contract = 0;
    std::uint64_t t_deploy = 0, t_created = 0;
    ledger::Deadlines deadlines;
    std::vector<std::optional<std::uint64_t>> seqs;  // per worker
    protocol::ProcessingBundle<G> bundle;
    std::vector<protocol::Finalization<G>> finals;
    std::vector<std::pair<std::size_t, protocol::Ruling>> rulings;
    std::optional<std::uint64_t> duplicate_seq, forged_seq;
    std::optional<policy::FinalAnswer> recount;
  };

  struct Invariant {
    std::string name;
    bool ok;
    std::string detail;
  };

  void setup() {
    auto ra_keys = crypto::keygen<G>(rng_);
    env_ = {backend_.parameters(), ra_keys.pk};
    ledger_.note({{"type", "header"},
                  {"version", 1},
                  {"group", std::string(G::kName)},
                  {"scenario", sc_.name},
                  {"seed", sc_.seed},
                  {"block_seconds", sc_.block_seconds},
                  {"tree_depth", sc_.tree_depth},
                  {"fees", sc_.fees.to_json()},
                  {"gas", sc_.gas.to_json()},
                  {"backend", env_.backend.to_json()},
                  {"pk_ra", to_hex(env_.pk_ra.to_bytes())},
                  {"arbiter", 0}});
    auto ra_wallet = open_wallet(kEther / 10);
    ledger_.set_arbiter(ra_wallet.id);
    role(ra_wallet.id, "ra");
    ra_ = std::make_unique<protocol::RegistrationAuthority<G>>(ra_keys, ra_wallet, rng_.fork("ra"));

    auto req_wallet = open_wallet(requester_funding());
    role(req_wallet.id, "requester");
    requester_ = std::make_unique<protocol::RequesterAgent<G>>(backend_, env_, req_wallet, crypto::keygen<G>(rng_),
                                                               rng_.fork("requester"));
    for (std::uint32_t i = 0; i < sc_.count; ++i) {
      auto wallet = open_wallet(sc_.funding);
      role(wallet.id, "workers");
      crew_.push_back(std::make_unique<protocol::WorkerAgent<G>>(backend_, env_, wallet, rng_.fork("worker", i)));
      crew_.back()->enroll(ra_->register_worker(ledger_, crew_.back()->identifier()));
    }
    expect_.assign(sc_.count, policy::QualityState{});
    if (sc_.has(Attack::DuplicateResponse) || sc_.has(Attack::ForgedProof)) {
      attacker_ = open_wallet(kEther / 10);
      role(attacker_->id, "attacker");
    }
  }

  protocol::Wallet<G> open_wallet(Wei balance) {
    auto w = protocol::Wallet<G>::open(ledger_, rng_, balance);
    w.priority_fee = sc_.fees.priority_fee;
    return w;
  }

  void role(AccountId id, const std::string& r) { roles_[id] = r; }

  Wei main_budget() const {
    return sc_.budget ? sc_.budget : ledger::checked_mul(sc_.count + 2, sc_.policy.p_correct);
  }

  Wei requester_funding() const {
    const auto& g = sc_.gas;
    const Wei price = sc_.fees.base_fee + sc_.fees.priority_fee;
    const std::uint64_t per_task = g.deploy + g.create_task + g.submit_auth_calc + g.refund +
                                   std::uint64_t{sc_.count} * (g.submit_quality + std::max(g.worker_payment, g.refund));
    Wei total = kEther / 100;
    for (std::uint32_t r = 0; r <= sc_.warmups; ++r) {
      total = ledger::checked_add(total, ledger::checked_mul(per_task, price));
      total = ledger::checked_add(total, r < sc_.warmups ? warmup_plan().budget : main_budget());
    }
    return total;
  }

  /// Calibration rounds: everyone answers 0 under 1-MF with no threshold, so
  /// each round moves every quality by one success.
  Plan warmup_plan() const {
    Plan p;
    p.policy = sc_.policy;
    p.policy.rule = policy::AnswerRule::MostFrequent;
    p.policy.gamma = 1;
    p.policy.threshold = {0, 1};
    p.policy.tolerance = 0;
    p.n_th = sc_.count;
    p.budget = ledger::checked_mul(sc_.count, sc_.policy.p_correct);
    p.response_window = sc_.response_window + kWarmupWindowSlack;
    p.processing_window = sc_.processing_window + kWarmupWindowSlack;
    p.answers.assign(sc_.count, 0);
    for (std::size_t i = 0; i < sc_.count; ++i) p.expected.insert(i);
    return p;
  }

  Plan main_plan() const {
    Plan p;
    p.main = true;
    p.policy = sc_.policy;
    p.n_th = sc_.n_th;
    p.budget = main_budget();
    p.response_window = sc_.response_window;
    p.processing_window = sc_.processing_window;
    if (sc_.has(Attack::DuplicateResponse) || sc_.has(Attack::ForgedProof)) p.response_window += kAttackWindowSlack;
    std::size_t responders = sc_.count;
    if (sc_.has(Attack::VoidTask)) responders = std::min<std::size_t>(sc_.count, sc_.n_th - 1);
    p.answers.assign(fx_.answers.begin(), fx_.answers.begin() + static_cast<std::ptrdiff_t>(responders));
    for (std::size_t i = 0; i < responders; ++i) p.expected.insert(i);
    if (sc_.has(Attack::StaleQuality)) p.expected.erase(sc_.count - 1);
    return p;
  }

  void wait(const Receipt& r) { ledger_.wait_for(r); }
  void advance_to(std::uint64_t b) {
    if (ledger_.block() < b) ledger_.advance(b - ledger_.block());
  }

  TaskRun run_task(const Plan& p) {
    TaskRun r;
    r.t_deploy = ledger_.block();
    auto d = requester_->deploy(ledger_);
    wait(d);
    r.contract = d.contract;

    TaskSpec<G> spec;
    spec.description = sc_.description;
    for (std::uint32_t i = 0; i < p.policy.choices; ++i)
      spec.answers.push_back(sc_.labels.empty() ? std::to_string(i) : sc_.labels[i]);
    spec.policy = p.policy;
    spec.n_th = p.n_th;
    spec.budget = p.budget;
    const auto b = ledger_.block();
    spec.deadlines = {b + p.response_window, b + p.response_window + p.processing_window,
                      b + p.response_window + p.processing_window + sc_.protest_window};
    r.deadlines = spec.deadlines;
    wait(requester_->create_task(ledger_, r.contract, spec));
    r.t_created = ledger_.block();

    std::vector<Receipt> receipts;
    for (std::size_t i = 0; i < p.answers.size(); ++i)
      receipts.push_back(crew_[i]->submit_response(ledger_, r.contract, p.answers[i]));
    r.seqs.assign(crew_.size(), std::nullopt);
    for (std::size_t i = 0; i < receipts.size(); ++i) r.seqs[i] = ledger_.wait_for(receipts[i]);
    if (p.main) inject(r, ledger_.read(r.contract).spec->pk_r);

    advance_to(spec.deadlines.response);
    if (p.main && sc_.has(Attack::Deprivation)) requester_->misbehavior().omit.insert(*r.seqs[0]);
    r.bundle = requester_->process(ledger_, r.contract);
    if (r.bundle.is_void) {
      wait(r.bundle.receipts.front());
      for (const auto& x : requester_->settle(ledger_, r.contract)) r.bundle.receipts.push_back(x);
    }
    for (const auto& x : r.bundle.receipts) wait(x);

    advance_to(spec.deadlines.processing);
    const auto screened = protocol::screen_ledger(env_, ledger_);
    for (auto& w : crew_) r.finals.push_back(w->finalize(ledger_, r.contract, &screened));
    for (std::size_t i = 0; i < r.finals.size(); ++i) {
      const auto& f = r.finals[i];
      if (f.outcome != protocol::Outcome::Protest || !f.evidence) continue;
      auto ruling = ra_->arbitrate(ledger_, env_, *f.evidence);
      if (ruling.confiscation) wait(*ruling.confiscation);
      r.rulings.emplace_back(i, std::move(ruling));
    }

    advance_to(spec.deadlines.protest);
    if (auto x = requester_->withdraw(ledger_, r.contract)) wait(*x);

    std::vector<std::uint32_t> survivors;
    for (auto i : p.expected) survivors.push_back(p.answers[i]);
    if (survivors.size() >= p.n_th && !survivors.empty()) r.recount = policy::ans_calc(survivors, {}, p.policy);
    return r;
  }

  /// Attacker submissions against worker 0's included tuple.
  void inject(TaskRun& r, const Element<G>& pk_r) {
    if (!attacker_ || !r.seqs[0]) return;
    const auto& original = ledger_.tx(*r.seqs[0]).tx.payload;
    std::vector<Receipt> rs;
    std::vector<std::optional<std::uint64_t>*> slots;
    if (sc_.has(Attack::DuplicateResponse)) {
      rs.push_back(attacker_->send(ledger_, Method::SubmitResponse, r.contract, original));
      slots.push_back(&r.duplicate_seq);
    }
    if (sc_.has(Attack::ForgedProof)) {
      auto t = protocol::ResponseTuple<G>::from_bytes(original);
      auto rand = crypto::random_scalars<G>(rng_, relations::kAnswerLimbs);
      t.answer = crypto::encrypt_limbs<G>(pk_r, crypto::Limbs{(fx_.answers[0] + 1) % sc_.policy.choices}, rand);
      rs.push_back(attacker_->send(ledger_, Method::SubmitResponse, r.contract, t.to_bytes()));
      slots.push_back(&r.forged_seq);
    }
    for (std::size_t i = 0; i < rs.size(); ++i) *slots[i] = ledger_.wait_for(rs[i]);
  }

  bool omitted(const TaskRun& r, std::size_t i) const {
    return r.seqs[i] && requester_misbehaved_on(*r.seqs[i]);
  }
  bool requester_misbehaved_on(std::uint64_t seq) const {
    return requester_->misbehavior().omit.count(seq) > 0;
  }

  /// Expected Beta parameters, replayed from plaintext answers.
  void replay_quality(const Plan& p, const TaskRun& r) {
    if (!r.recount) return;
    for (auto i : p.expected) {
      if (omitted(r, i)) continue;
      expect_[i] = policy::qual_update(expect_[i], policy::is_correct(p.answers[i], *r.recount, p.policy));
    }
  }

  Wei received(AccountId to, ContractId c, bool include_confiscation = false) const {
    Wei sum = 0;
    for (const auto& t : ledger_.transactions()) {
      if (t.status != ledger::TxStatus::Ok || t.tx.contract != c || t.tx.recipient != to) continue;
      if (t.tx.method == Method::WorkerPayment || t.tx.method == Method::Refund ||
          (include_confiscation && t.tx.method == Method::Confiscate))
        sum += t.moved;
    }
    return sum;
  }

  void expect(std::string name, bool ok, std::string detail = {}) {
    invariants_.push_back({std::move(name), ok, ok ? std::string() : std::move(detail)});
  }

  void check_invariants(const Plan& p, const TaskRun& r) {
    const auto& b = r.bundle;
    const auto c = r.contract;

    // Final answer against a recount of the fixture plaintexts.
    if (r.recount) {
      expect("final_answer_recount", !b.is_void && b.final_answer == r.recount,
             "published final answer differs from the plaintext recount");
    } else {
      expect("final_answer_recount", b.is_void, "expected a void task below n_th");
    }

    std::set<std::uint64_t> want, got;
    for (auto i : p.expected) want.insert(*r.seqs[i]);
    for (const auto& ws : b.workers) got.insert(ws.response);
    expect("survivors_match", want == got, "screening kept a different response set than expected");

    bool qual_ok = true;
    std::string qual_detail;
    for (std::size_t i = 0; i < crew_.size(); ++i)
      if (!(crew_[i]->quality() == expect_[i])) {
        qual_ok = false;
        qual_detail = "worker " + std::to_string(i) + " holds a quality the replay does not predict";
        break;
      }
    expect("quality_replay", qual_ok, qual_detail);

    bool pay_ok = true;
    std::string pay_detail;
    Wei owed = 0;
    for (auto i : p.expected) {
      if (omitted(r, i)) continue;
      const auto* s = crew_[i]->task(c);
      Wei due = b.is_void ? ledger_.tx(*r.seqs[i]).fee
                          : policy::paym_calc(policy::is_correct(p.answers[i], *r.recount, p.policy), p.policy);
      owed += due;
      if (received(s->pay.id, c) != due) {
        pay_ok = false;
        pay_detail = "worker " + std::to_string(i) + " was not paid its policy amount";
      }
    }
    const auto& st = ledger_.read(c);
    const Wei settled = b.is_void ? st.refunded - received(requester_->wallet().id, c) : st.paid;
    if (settled != owed) {
      pay_ok = false;
      pay_detail = "total settlement differs from the paym_calc sum";
    }
    expect("payments_match_policy", pay_ok, pay_detail);
    expect("budget_bound", st.paid <= ledger::checked_mul(b.workers.size(), p.policy.p_correct) &&
                               b.workers.size() * p.policy.p_correct <= p.budget,
           "payments exceed n * p_correct or the budget");

    bool outcomes_ok = true;
    std::string outcomes_detail;
    for (std::size_t i = 0; i < crew_.size(); ++i) {
      const auto& f = r.finals[i];
      auto want_outcome = protocol::Outcome::NotParticipating;
      if (r.seqs[i]) want_outcome = p.expected.count(i) && !omitted(r, i) ? protocol::Outcome::Adopted : protocol::Outcome::Protest;
      if (f.outcome != want_outcome) {
        outcomes_ok = false;
        outcomes_detail = "worker " + std::to_string(i) + " finalized as " + protocol::to_string(f.outcome) + " (" +
                          f.reason + ")";
      }
    }
    expect("honest_workers_adopted", outcomes_ok, outcomes_detail);

    bool warm_ok = true;
    std::string warm_detail;
    for (std::size_t t = 0; t + 1 < tasks_.size(); ++t)
      for (std::size_t i = 0; i < tasks_[t].finals.size(); ++i)
        if (const auto& f = tasks_[t].finals[i]; f.outcome != protocol::Outcome::Adopted) {
          if (warm_ok) warm_detail = "warm-up " + std::to_string(t) + ", worker " + std::to_string(i) + ": " + f.reason;
          warm_ok = false;
        }
    expect("warmups_adopted", warm_ok, warm_detail);

    bool escrow_ok = true;
    for (std::size_t i = 0; i < ledger_.contract_count(); ++i) {
      const auto& x = ledger_.read(i);
      escrow_ok &= x.deposited == x.paid + x.refunded + x.confiscated + x.escrow && x.escrow == 0;
    }
    expect("escrow_conserved", escrow_ok, "some contract does not balance to zero");

    Wei initial = 0, final_sum = 0, fees = 0;
    std::uint64_t log_gas = 0;
    for (const auto& rec : ledger_.log()) {
      if (rec["type"] == "account") initial += rec["balance"].template get<Wei>();
      if (rec["type"] == "tx") {
        fees += rec["fee"].template get<Wei>();
        log_gas += rec["gas"].template get<std::uint64_t>();
      }
    }
    for (std::size_t i = 0; i < ledger_.account_count(); ++i) final_sum += ledger_.balance(i);
    expect("value_conserved", initial == final_sum + fees, "balances plus fees do not add up to the funding");

    std::uint64_t party_gas = 0;
    for (const auto& [name, g] : party_totals()) party_gas += g.gas;
    expect("gas_equals_log_sum", party_gas == log_gas, "per-party gas totals differ from the log");

    check_attacks(p, r);

    auto audit = verify_log<G>(ledger_.log());
    audit_ = audit.to_json();
    expect("verify_log", audit.ok, audit.failures.empty() ? "" : audit.failures.front());
  }

  void check_attacks(const Plan& p, const TaskRun& r) {
    const auto& b = r.bundle;
    auto count = [&](protocol::Verdict v, std::optional<std::uint64_t> seq) {
      std::size_t n = 0;
      bool hit = false;
      for (const auto& d : b.detections)
        if (d.verdict == v) {
          ++n;
          hit |= seq && d.seq == *seq;
        }
      return std::pair{n, hit};
    };
    Wei attacker_got = 0;
    if (attacker_)
      for (const auto& t : ledger_.transactions())
        if (t.status == ledger::TxStatus::Ok && t.tx.recipient == attacker_->id &&
            (t.tx.method == Method::WorkerPayment || t.tx.method == Method::Refund ||
             t.tx.method == Method::Confiscate))
          attacker_got += t.moved;

    for (auto a : sc_.attacks) {
      std::string name = std::string("attack.") + to_string(a);
      json observed;
      bool ok = false;
      switch (a) {
        case Attack::DuplicateResponse: {
          auto [n, hit] = count(protocol::Verdict::Duplicate, r.duplicate_seq);
          ok = n == 1 && hit && attacker_got == 0;
          observed = {{"duplicate_detections", n}, {"attacker_received_wei", attacker_got}};
          break;
        }
        case Attack::ForgedProof: {
          auto [n, hit] = count(protocol::Verdict::ProofRejected, r.forged_seq);
          ok = n == 1 && hit && attacker_got == 0;
          observed = {{"proof_rejections", n}, {"attacker_received_wei", attacker_got}};
          break;
        }
        case Attack::StaleQuality: {
          auto stale = r.seqs[sc_.count - 1];
          auto [n, hit] = count(protocol::Verdict::TagCollision, stale);
          bool excluded = true;
          for (const auto& ws : b.workers) excluded &= ws.response != *stale;
          ok = n == 1 && hit && excluded;
          observed = {{"tag_collisions", n}, {"offender_excluded", excluded}};
          break;
        }
        case Attack::Deprivation: {
          std::size_t upheld = 0;
          Wei seized = 0;
          for (const auto& [i, ruling] : r.rulings)
            if (ruling.upheld) {
              ++upheld;
              if (i == 0) seized = ledger_.read(r.contract).confiscated;
            }
          const auto* s = crew_[0]->task(r.contract);
          Wei to_victim = s ? received(s->pay.id, r.contract, true) : 0;
          ok = upheld == 1 && seized > 0 && to_victim == seized;
          observed = {{"protests_upheld", upheld}, {"confiscated_wei", seized}};
          break;
        }
        case Attack::VoidTask: {
          ok = b.is_void && b.workers.size() + 1 == p.n_th;
          observed = {{"void", b.is_void}, {"responses", b.workers.size()}};
          break;
        }
      }
      attacks_.push_back({{"attack", to_string(a)}, {"detected", ok}, {"observed", observed}});
      expect(name, ok, "designated detection not observed");
    }
    std::size_t detections_expected = sc_.has(Attack::DuplicateResponse) + sc_.has(Attack::ForgedProof) +
                                      sc_.has(Attack::StaleQuality);
    expect("one_detection_per_attack", b.detections.size() == detections_expected,
           std::to_string(b.detections.size()) + " detections for " + std::to_string(detections_expected) +
               " injected responses");
  }

  struct PartyGas {
    std::uint64_t gas = 0;
    Wei fee = 0;
    std::size_t txs = 0;
  };

  std::map<std::string, PartyGas> party_totals(std::optional<ContractId> only = std::nullopt) const {
    std::map<std::string, PartyGas> out;
    for (const auto& t : ledger_.transactions()) {
      if (only && t.tx.contract != *only) continue;
      auto it = roles_.find(t.tx.sender);
      auto& pg = out[it == roles_.end() ? "other" : it->second];
      pg.gas += t.gas;
      pg.fee += t.fee;
      ++pg.txs;
    }
    return out;
  }

  json gas_json(const PartyGas& g) const {
    return {{"gas", g.gas},
            {"fee_wei", g.fee},
            {"usd", std::round(static_cast<double>(g.fee) / static_cast<double>(kEther) * sc_.fees.eth_usd * 100) / 100},
            {"transactions", g.txs}};
  }

  json report(const Plan& p, const TaskRun& r, std::uint64_t t_reg, std::uint64_t t_warm) const {
    const auto& b = r.bundle;
    const auto total = r.deadlines.processing - r.t_deploy;
    json blocks = {{"setup", r.t_created - r.t_deploy},
                   {"collection", r.deadlines.response - r.t_created},
                   {"processing", r.deadlines.processing - r.deadlines.response},
                   {"total", total},
                   {"protest", r.deadlines.protest - r.deadlines.processing}};

    json gas;
    for (const auto& [name, g] : party_totals()) gas[name] = gas_json(g);
    auto main_only = party_totals(r.contract);
    gas["requester_main_task"] = gas_json(main_only["requester"]);

    std::size_t auth_qual = 0, auth_value = 0;
    for (auto seq : ledger_.read(r.contract).quality_posts) {
      auto post = protocol::QualityPost<G>::from_bytes(ledger_.tx(seq).tx.payload);
      ++auth_qual;
      auth_value += post.auth_value.has_value();
    }

    json workers = json::array();
    for (std::size_t i = 0; i < crew_.size(); ++i) {
      const auto& f = r.finals[i];
      const auto* s = crew_[i]->task(r.contract);
      json row = {{"worker", fx_.indices[i]},
                  {"answer", i < p.answers.size() ? json(p.answers[i]) : json(nullptr)},
                  {"outcome", protocol::to_string(f.outcome)}};
      std::optional<bool> correct;
      for (const auto& ws : b.workers)
        if (r.seqs[i] && ws.response == *r.seqs[i]) correct = ws.correct;
      row["correct"] = correct ? json(*correct) : json(nullptr);
      row["payment_wei"] = s ? received(s->pay.id, r.contract) : 0;
      row["quality"] = {{"alpha", crew_[i]->quality().alpha}, {"beta", crew_[i]->quality().beta}};
      if (!f.reason.empty()) row["reason"] = f.reason;
      workers.push_back(row);
    }

    json detections = json::array();
    for (const auto& d : b.detections)
      detections.push_back({{"response", d.seq},
                            {"verdict", protocol::to_string(d.verdict)},
                            {"conflicts_with", d.conflicts_with ? json(*d.conflicts_with) : json(nullptr)}});
    json protests = json::array();
    for (const auto& [i, ruling] : r.rulings)
      protests.push_back({{"worker", fx_.indices[i]}, {"upheld", ruling.upheld}, {"reason", ruling.reason}});

    json final_answer = nullptr;
    if (b.final_answer) {
      final_answer = b.final_answer->to_json();
      if (b.final_answer->rule == policy::AnswerRule::MostFrequent) {
        json labels = json::array();
        for (auto id : b.final_answer->top)
          labels.push_back(sc_.labels.empty() ? std::to_string(id) : sc_.labels.at(id));
        final_answer["labels"] = labels;
      }
    }

    json invariants = json::array();
    bool ok = true;
    for (const auto& inv : invariants_) {
      json row = {{"name", inv.name}, {"ok", inv.ok}};
      if (!inv.ok) row["detail"] = inv.detail;
      invariants.push_back(row);
      ok &= inv.ok;
    }

    const double seconds = static_cast<double>(total * sc_.block_seconds);
    json rep;
    rep["scenario"] = sc_.name;
    rep["seed"] = sc_.seed;
    rep["group"] = std::string(G::kName);
    rep["network"] = sc_.fees.latency.name;
    rep["note"] =
        "simulated time counts block latency only, from Deploy to the processing deadline; proving is reported as "
        "operation counts";
    rep["workers"] = sc_.count;
    rep["registration"] = {{"workers", ra_->registered()}, {"blocks", t_reg}};
    rep["warmups"] = {{"rounds", sc_.warmups}, {"blocks", t_warm - t_reg}};
    rep["blocks"] = blocks;
    rep["simulated_seconds"] = seconds;
    rep["simulated_minutes"] = seconds / 60.0;
    rep["gas"] = gas;
    rep["proofs"] = {{"ProveQual", p.answers.size()},
                     {"AuthCalc", b.final_answer ? 1 : 0},
                     {"AuthQual", auth_qual},
                     {"AuthValue", auth_value}};
    rep["void"] = b.is_void;
    rep["final_answer"] = final_answer;
    rep["per_worker"] = workers;
    rep["detections"] = detections;
    rep["protests"] = protests;
    rep["attacks"] = attacks_;
    rep["audit"] = audit_;
    rep["invariants"] = invariants;
    rep["ok"] = ok;
    return rep;
  }

  Scenario sc_;
  Fixture fx_;
  crypto::Drbg rng_;
  Ledger<G> ledger_;
  relations::AttestationBackend<G> backend_;
  protocol::Environment<G> env_;
  std::unique_ptr<protocol::RegistrationAuthority<G>> ra_;
  std::unique_ptr<protocol::RequesterAgent<G>> requester_;
  std::vector<std::unique_ptr<protocol::WorkerAgent<G>>> crew_;
  std::optional<protocol::Wallet<G>> attacker_;
  std::map<AccountId, std::string> roles_;
  std::vector<policy::QualityState> expect_;
  std::vector<TaskRun> tasks_;
  std::vector<Invariant> invariants_;
  json attacks_ = json::array();
  json audit_;
};

template <PrimeOrderGroup G>
RunOutput run_scenario(const Scenario& sc, const Fixture& fx) {
  return Runner<G>(sc, fx).run();
}

inline RunOutput run_scenario(const Scenario& sc) {
  return run_scenario<crypto::Ristretto255>(sc, ingest_fixture(sc.fixture_path(), sc.policy.choices));
}

}  // namespace avecq::harness
