#pragma once

// Builders for honest relation instances, independent of the protocol agents.

#include <vector>

#include "avecq/crypto/drbg.hpp"
#include "avecq/relations/backend.hpp"

namespace fixtures {

using namespace avecq;
using namespace avecq::crypto;
using namespace avecq::relations;

template <PrimeOrderGroup G>
struct RegisteredWorker {
  Scalar<G> m;
  Signature<G> cert;
  policy::QualityState quality;
  ScalarPair<G> r_c;
  ScalarPair<G> r_dummy;
  CommitmentPair<G> base;
  std::uint64_t position = 0;
};

/// Commits `quality` as base + dummy, signs m and appends the leaf.
template <PrimeOrderGroup G>
RegisteredWorker<G> register_worker(Drbg& rng, const KeyPair<G>& ra, merkle::MerkleTree& tree,
                                    policy::QualityState quality) {
  RegisteredWorker<G> w;
  w.m = random_scalar<G>(rng);
  w.cert = sign<G>(ra.sk, w.m.to_bytes());
  w.quality = quality;
  w.r_c = {random_scalar<G>(rng), random_scalar<G>(rng)};
  w.r_dummy = {random_scalar<G>(rng), random_scalar<G>(rng)};
  w.base = commit_pair<G>(quality.alpha, quality.beta, w.r_c - w.r_dummy);
  auto leaf = w.base + commit_pair<G>(0, 0, w.r_dummy);
  w.position = tree.append(quality_leaf<G>(leaf));
  return w;
}

template <PrimeOrderGroup G>
struct ProveQualInstance {
  ProveQualStatement<G> stmt;
  ProveQualWitness<G> wit;
};

template <PrimeOrderGroup G>
ProveQualInstance<G> honest_prove_qual(Drbg& rng, const RegisteredWorker<G>& w, const merkle::MerkleTree& tree,
                                       const KeyPair<G>& ra, const Element<G>& pk_r, const policy::TaskPolicy& p,
                                       const Digest& params, std::uint32_t answer, std::uint32_t address) {
  ProveQualInstance<G> inst;
  auto& x = inst.stmt;
  auto& wt = inst.wit;
  wt.cert = w.cert;
  wt.m = w.m;
  wt.quality = w.quality;
  wt.r_c = w.r_c;
  wt.r_star = {random_scalar<G>(rng), random_scalar<G>(rng)};
  wt.r_dummy = w.r_dummy;
  wt.base = w.base;
  wt.answer = answer;
  wt.answer_rand = random_scalars<G>(rng, kAnswerLimbs);
  wt.address = address;
  wt.address_rand = random_scalars<G>(rng, kAddressLimbs);
  wt.path = tree.prove_membership(w.position);

  auto leaf = w.base + commit_pair<G>(0, 0, w.r_dummy);
  x.params = params;
  x.policy = p;
  x.mt_root = tree.root();
  x.pk_r = pk_r;
  x.pk_ra = ra.pk;
  x.rerandomized = leaf + commit_pair<G>(0, 0, wt.r_star);
  x.tag = quality_tag<G>(leaf, w.m);
  x.answer = encrypt_limbs<G>(pk_r, Limbs{answer}, wt.answer_rand);
  x.address = encrypt_limbs<G>(pk_r, u32_limbs(address), wt.address_rand);
  auto blind = rng.bytes<16>();
  x.blind = encrypt_limbs<G>(pk_r, bytes_to_limbs(blind), random_scalars<G>(rng, kBlindLimbs));
  return inst;
}

template <PrimeOrderGroup G>
EncryptedValue<G> encrypt_answer(Drbg& rng, const Element<G>& pk, std::uint32_t a) {
  return encrypt_limbs<G>(pk, Limbs{a}, random_scalars<G>(rng, 1));
}

template <PrimeOrderGroup G>
EncryptedValue<G> encrypt_final(Drbg& rng, const Element<G>& pk, const policy::FinalAnswer& f) {
  auto limbs = words_to_limbs(f.words());
  return encrypt_limbs<G>(pk, limbs, random_scalars<G>(rng, limbs.size()));
}

inline policy::TaskPolicy make_policy(policy::AnswerRule rule, std::uint32_t gamma, std::uint32_t choices,
                                      std::uint32_t tolerance = 0, policy::Fraction threshold = {1, 2}) {
  policy::TaskPolicy p;
  p.rule = rule;
  p.gamma = gamma;
  p.choices = choices;
  p.tolerance = tolerance;
  p.threshold = threshold;
  p.p_correct = 100;
  p.p_incorrect = 50;
  return p;
}

}  // namespace fixtures
