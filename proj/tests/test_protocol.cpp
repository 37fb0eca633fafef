#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "protocol_sim.hpp"

using namespace avecq;
using namespace avecq::protocol;
using G = crypto::SmallPrimeGroup;
using Simulation = sim::Sim<G>;

namespace {

std::size_t count_verdict(const ProcessingBundle<G>& b, Verdict v) {
  return std::count_if(b.detections.begin(), b.detections.end(), [&](const Detection& d) { return d.verdict == v; });
}

TEST(Registration, FreshIdentifier) {
  Simulation s(3);
  for (const auto& w : s.crew) {
    EXPECT_TRUE(crypto::verify_sig<G>(s.ra->pk(), w->identifier().to_bytes(), w->cert()));
    auto path = s.ledger.tree().prove_membership(w->position());
    EXPECT_TRUE(merkle::verify_path(s.ledger.tree().root(), relations::quality_leaf<G>(w->stored_pair()), path));
    EXPECT_TRUE(crypto::open_check_pair<G>(w->stored_pair(), 1, 1, w->r_c()));
  }
  EXPECT_EQ(s.ledger.tree().size(), 3u);
  EXPECT_EQ(s.ra->registered(), 3u);
}

TEST(Registration, SybilRejected) {
  Simulation s(1);
  EXPECT_THROW(s.ra->register_worker(s.ledger, s.crew[0]->identifier()), DuplicateIdentifier);
  EXPECT_EQ(s.ledger.tree().size(), 1u);
}

TEST(Response, ThresholdAndDomain) {
  Simulation s(2);
  // give worker 0 a (4, 1) opening
  crypto::Drbg rng(8);
  Registration<G> r;
  r.quality = {4, 1};
  r.r_c = {crypto::random_scalar<G>(rng), crypto::random_scalar<G>(rng)};
  r.base = crypto::commit_pair<G>(4, 1, r.r_c);
  r.cert = s.crew[0]->cert();
  r.position = s.ledger.append_leaf(relations::quality_leaf<G>(r.base), "test");
  s.crew[0]->enroll(r);

  auto c = s.open_task(s.policy(policy::AnswerRule::MostFrequent, 2, {3, 4}), 1);
  auto tuple = s.crew[0]->build_response(s.ledger, c, 1);
  auto x = tuple.statement(s.env.params(), task_spec(s.ledger, c).policy, s.requester->pk(), s.ra->pk());
  EXPECT_TRUE(relations::verify<G>(s.backend.parameters(), x, tuple.proof));
  EXPECT_THROW(s.crew[1]->build_response(s.ledger, c, 1), ThresholdNotCleared);
  EXPECT_THROW(s.crew[1]->build_response(s.ledger, c, 2), PolicyError);
}

TEST(Protocol, FiveWorkerMajority) {
  Simulation s(5);
  auto p = s.policy();
  auto c = s.open_task(p, 3);
  const std::vector<std::uint32_t> answers{1, 1, 1, 0, 0};
  s.respond(c, answers);
  auto b = s.process(c);
  ASSERT_FALSE(b.is_void);
  EXPECT_EQ(b.final_answer->top, oracle::top_gamma(answers, 2, 1));
  EXPECT_EQ(b.final_answer->top, std::vector<std::uint32_t>{1});
  Wei paid = 0;
  for (const auto& ws : b.workers) paid += ws.payment;
  EXPECT_EQ(paid, 3 * p.p_correct + 2 * p.p_incorrect);
  EXPECT_EQ(s.ledger.read(c).paid, paid);

  auto fin = s.finalize(c, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    ASSERT_EQ(fin[i].outcome, Outcome::Adopted) << i << ": " << fin[i].reason;
    auto expect = policy::qual_update({1, 1}, answers[i] == 1);
    EXPECT_EQ(s.crew[i]->quality(), expect) << i;
    EXPECT_TRUE(crypto::open_check_pair<G>(s.crew[i]->stored_pair(), expect.alpha, expect.beta, s.crew[i]->r_c()));
  }
  std::size_t alpha_inc = 0, beta_inc = 0;
  for (const auto& f : fin) {
    alpha_inc += f.mu.first;
    beta_inc += f.mu.second;
  }
  EXPECT_EQ(alpha_inc, 3u);
  EXPECT_EQ(beta_inc, 2u);
  const auto& st = s.ledger.read(c);
  EXPECT_EQ(st.deposited, st.paid + st.refunded + st.confiscated + st.escrow);
}

TEST(Protocol, QualityReplayAcrossTasks) {
  Simulation s(4);
  std::vector<std::uint32_t> answers{0, 0, 1, 0};
  std::vector<policy::QualityState> replay(4);
  for (int round = 0; round < 3; ++round) {
    auto c = s.open_task(s.policy(), 2);
    s.respond(c, answers);
    auto b = s.process(c);
    for (auto f : s.finalize(c, 4)) ASSERT_EQ(f.outcome, Outcome::Adopted) << f.reason;
    for (std::size_t i = 0; i < 4; ++i) {
      replay[i] = policy::qual_update(replay[i], policy::is_correct(answers[i], *b.final_answer, s.policy()));
      EXPECT_EQ(s.crew[i]->quality(), replay[i]);
    }
    std::rotate(answers.begin(), answers.begin() + 1, answers.end());
  }
}

TEST(Protocol, TagsChangeWithQualityAndReplayCollides) {
  Simulation s(3);
  auto before = s.crew[0]->snapshot();
  auto c1 = s.open_task(s.policy(), 2);
  s.respond(c1, {1, 1, 0});
  s.process(c1);
  s.finalize(c1, 3);
  auto tag1 = s.crew[0]->task(c1)->tuple.tag;

  auto c2 = s.open_task(s.policy(), 2);
  auto tag2 = s.crew[0]->build_response(s.ledger, c2, 1).tag;
  EXPECT_NE(tag1, tag2);

  // a stale copy of the pre-update state reproduces the old tag exactly
  WorkerAgent<G> stale(s.backend, s.env, s.crew[0]->wallet(), crypto::Drbg(77));
  stale.restore(before);
  EXPECT_EQ(stale.build_response(s.ledger, c2, 1).tag, tag1);
}

TEST(Protocol, StaleQualityDetected) {
  Simulation s(4);
  auto before = s.crew[3]->snapshot();
  auto c1 = s.open_task(s.policy(), 2);
  s.respond(c1, {1, 1, 0, 1});
  s.process(c1);
  s.finalize(c1, 4);

  auto c2 = s.open_task(s.policy(), 2);
  s.crew[3]->restore(before);
  s.respond(c2, {1, 0, 1, 1});
  auto b = s.process(c2);
  EXPECT_EQ(count_verdict(b, Verdict::TagCollision), 1u);
  EXPECT_EQ(b.detections.size(), 1u);
  EXPECT_EQ(b.workers.size(), 3u);
  auto fin = s.finalize(c2, 4);
  EXPECT_EQ(fin[3].outcome, Outcome::Protest);
  auto ruling = s.ra->arbitrate(s.ledger, s.env, *fin[3].evidence);
  EXPECT_FALSE(ruling.upheld) << ruling.reason;
}

TEST(Protocol, DuplicateTupleDropped) {
  Simulation s(4);
  auto c = s.open_task(s.policy(), 2);
  auto rs = s.respond(c, {1, 0, 1, 1});
  // a free rider replays worker 2's included tuple from its own account
  crypto::Drbg rng(5);
  auto rider = Wallet<G>::open(s.ledger, rng, kEther / 10);
  auto copied = s.ledger.tx(*s.ledger.seq_of(rs[2].submission)).tx.payload;
  auto r = rider.send(s.ledger, ledger::Method::SubmitResponse, c, copied);
  s.wait(r);
  auto b = s.process(c);
  ASSERT_EQ(b.detections.size(), 1u);
  EXPECT_EQ(b.detections[0].verdict, Verdict::Duplicate);
  EXPECT_EQ(b.detections[0].seq, *s.ledger.seq_of(r.submission));
  EXPECT_EQ(b.detections[0].conflicts_with, *s.ledger.seq_of(rs[2].submission));
  EXPECT_EQ(b.workers.size(), 4u);
  EXPECT_EQ(s.ledger.balance(rider.id), kEther / 10 - r.fee);
}

TEST(Protocol, MutatedTupleRejected) {
  Simulation s(3);
  auto c = s.open_task(s.policy(), 2);
  auto rs = s.respond(c, {1, 0, 1});
  auto tuple = s.crew[1]->task(c)->tuple;
  crypto::Drbg rng(6);
  tuple.answer = crypto::encrypt_limbs<G>(s.requester->pk(), crypto::Limbs{1}, crypto::random_scalars<G>(rng, 1));
  auto rider = Wallet<G>::open(s.ledger, rng, kEther / 10);
  s.wait(rider.send(s.ledger, ledger::Method::SubmitResponse, c, tuple.to_bytes()));
  auto b = s.process(c);
  ASSERT_EQ(b.detections.size(), 1u);
  EXPECT_EQ(b.detections[0].verdict, Verdict::ProofRejected);
  EXPECT_EQ(b.workers.size(), 3u);
}

TEST(Protocol, VoidBelowThreshold) {
  Simulation s(3);
  auto c = s.open_task(s.policy(), 4);
  auto rs = s.respond(c, {1, 0, 1});
  auto b = s.process(c);
  EXPECT_TRUE(b.is_void);
  EXPECT_EQ(s.ledger.read(c).phase, ledger::Phase::Void);
  auto fin = s.finalize(c, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_EQ(fin[i].outcome, Outcome::Adopted) << fin[i].reason;
    EXPECT_EQ(s.crew[i]->quality(), (policy::QualityState{1, 1}));
    auto pay = s.crew[i]->task(c)->pay.id;
    EXPECT_EQ(s.ledger.balance(pay), rs[i].fee);
  }
  const auto& st = s.ledger.read(c);
  EXPECT_EQ(st.paid, 0u);
  EXPECT_EQ(st.refunded, rs[0].fee + rs[1].fee + rs[2].fee);
}

TEST(Protocol, FlippedIncrementUpheld) {
  Simulation s(3);
  auto c = s.open_task(s.policy(), 2);
  auto rs = s.respond(c, {1, 1, 0});
  s.requester->misbehavior().flip.insert(*s.ledger.seq_of(rs[0].submission));
  s.process(c);
  auto fin = s.finalize(c, 3);
  EXPECT_EQ(fin[0].outcome, Outcome::Protest);
  EXPECT_EQ(fin[0].evidence->claim, ClaimKind::BadQuality);
  EXPECT_EQ(fin[1].outcome, Outcome::Adopted);
  EXPECT_EQ(fin[2].outcome, Outcome::Adopted);
  EXPECT_EQ(s.crew[0]->quality(), (policy::QualityState{1, 1}));

  auto ev = ProtestEvidence<G>::from_bytes(fin[0].evidence->to_bytes());
  auto before = s.ledger.read(c).escrow;
  auto ruling = s.ra->arbitrate(s.ledger, s.env, ev);
  ASSERT_TRUE(ruling.upheld) << ruling.reason;
  s.wait(*ruling.confiscation);
  EXPECT_EQ(s.ledger.read(c).confiscated, before);
  EXPECT_EQ(s.ledger.read(c).escrow, 0u);
}

TEST(Protocol, DeprivationUpheld) {
  Simulation s(3);
  auto c = s.open_task(s.policy(), 2);
  auto rs = s.respond(c, {1, 1, 0});
  s.requester->misbehavior().omit.insert(*s.ledger.seq_of(rs[2].submission));
  s.process(c);
  auto fin = s.finalize(c, 3);
  ASSERT_EQ(fin[2].outcome, Outcome::Protest);
  EXPECT_EQ(fin[2].evidence->claim, ClaimKind::Deprivation);
  auto pay = s.crew[2]->task(c)->pay.id;
  EXPECT_EQ(s.ledger.balance(pay), 0u);
  auto escrow = s.ledger.read(c).escrow;
  auto ruling = s.ra->arbitrate(s.ledger, s.env, *fin[2].evidence);
  ASSERT_TRUE(ruling.upheld);
  s.wait(*ruling.confiscation);
  EXPECT_EQ(s.ledger.balance(pay), escrow);
  const auto& st = s.ledger.read(c);
  EXPECT_EQ(st.deposited, st.paid + st.refunded + st.confiscated + st.escrow);
}

TEST(Protocol, HonestProtestDismissed) {
  Simulation s(3);
  auto c = s.open_task(s.policy(), 2);
  auto rs = s.respond(c, {1, 1, 0});
  s.process(c);
  s.finalize(c, 3);
  const auto* t = s.crew[1]->task(c);
  ProtestEvidence<G> ev;
  ev.contract = c;
  ev.claim = ClaimKind::Deprivation;
  ev.response = *s.ledger.seq_of(rs[1].submission);
  ev.tuple = t->tuple;
  ev.address = t->pay.id;
  ev.address_rand = t->address_rand;
  auto ruling = s.ra->arbitrate(s.ledger, s.env, ev);
  EXPECT_FALSE(ruling.upheld) << ruling.reason;
  EXPECT_FALSE(ruling.confiscation);

  ev.address = t->pay.id + 1;  // someone else's account
  EXPECT_FALSE(s.ra->arbitrate(s.ledger, s.env, ev).upheld);
  EXPECT_THROW(ProtestEvidence<G>::from_bytes(Bytes{1, 2, 3}), MalformedEvidence);
}

TEST(Protocol, ArbitrationWaitsForDeadline) {
  Simulation s(2);
  auto c = s.open_task(s.policy(), 2);
  s.respond(c, {1, 1});
  ProtestEvidence<G> ev;
  ev.contract = c;
  EXPECT_THROW(s.ra->arbitrate(s.ledger, s.env, ev), MalformedEvidence);
  EXPECT_THROW(s.requester->process(s.ledger, c), ProtocolError);
}

TEST(Protocol, RerandomizedSubmissionsUnlinkable) {
  Simulation s(4);
  std::vector<CommitmentPair<G>> seen;
  for (int round = 0; round < 2; ++round) {
    auto c = s.open_task(s.policy(), 2);
    s.respond(c, {1, 0, 1, 1});
    for (const auto& w : s.crew) {
      const auto* t = w->task(c);
      const auto& pair = t->tuple.rerandomized;
      for (const auto& leaf : s.ledger.tree().leaves()) EXPECT_NE(relations::quality_leaf<G>(pair), leaf);
      EXPECT_EQ(std::count(seen.begin(), seen.end(), pair), 0);
      EXPECT_TRUE(crypto::open_check_pair<G>(pair, w->quality().alpha, w->quality().beta, w->r_c() + t->r_star));
      seen.push_back(pair);
    }
    s.process(c);
    s.finalize(c, 4);
  }
}

TEST(Protocol, SnapshotRoundTrip) {
  Simulation s(1);
  auto snap = s.crew[0]->snapshot();
  WorkerAgent<G> copy(s.backend, s.env, s.crew[0]->wallet(), crypto::Drbg(3));
  copy.restore(snap);
  EXPECT_EQ(copy.snapshot(), snap);
  EXPECT_EQ(copy.stored_pair(), s.crew[0]->stored_pair());
  EXPECT_EQ(copy.identifier(), s.crew[0]->identifier());
}

TEST(Protocol, AverageRule) {
  Simulation s(6);
  auto p = s.policy(policy::AnswerRule::Average, 5);
  p.tolerance = 1;
  auto c = s.open_task(p, 3);
  std::vector<std::uint32_t> answers{4, 3, 3, 0, 4, 2};
  s.respond(c, answers);
  auto b = s.process(c);
  EXPECT_EQ(b.final_answer->sum, 16u);
  EXPECT_EQ(b.final_answer->count, 6u);
  auto fin = s.finalize(c, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    ASSERT_EQ(fin[i].outcome, Outcome::Adopted) << fin[i].reason;
    bool correct = oracle::avg_correct(answers[i], answers, 1);
    EXPECT_EQ(fin[i].mu.first, correct ? 1u : 0u) << i;
  }
}

}  // namespace
