#pragma once

#include <optional>
#include <vector>

#include "avecq/crypto/elgamal.hpp"
#include "avecq/crypto/pedersen.hpp"
#include "avecq/crypto/schnorr.hpp"
#include "avecq/merkle/merkle_tree.hpp"
#include "avecq/policy/policy.hpp"

namespace avecq::relations {

using crypto::CommitmentPair;
using crypto::Digest;
using crypto::Element;
using crypto::EncryptedValue;
using crypto::PrimeOrderGroup;
using crypto::Scalar;
using crypto::ScalarPair;

/// Pinned wire identifiers.
enum class RelationId : std::uint8_t { ProveQual = 1, AuthCalc = 2, AuthValue = 3, AuthQual = 4 };

inline const char* to_string(RelationId id) {
  switch (id) {
    case RelationId::ProveQual: return "prove_qual";
    case RelationId::AuthCalc: return "auth_calc";
    case RelationId::AuthValue: return "auth_value";
    case RelationId::AuthQual: return "auth_qual";
  }
  return "unknown";
}

/// Limb counts of the encrypted fields.
inline constexpr std::size_t kAnswerLimbs = 1;
inline constexpr std::size_t kAddressLimbs = 2;
inline constexpr std::size_t kBlindLimbs = 8;  // 128-bit r_k

/// Tag linking a stored quality to its owner: H(canonical(pair) || canonical(m)).
template <PrimeOrderGroup G>
Digest quality_tag(const CommitmentPair<G>& stored, const Scalar<G>& m) {
  return crypto::hash_tagged("avecq/quality-tag/v1", {stored.to_bytes(), m.to_bytes()});
}

template <PrimeOrderGroup G>
Digest quality_leaf(const CommitmentPair<G>& stored) {
  return merkle::leaf_digest(stored.to_bytes());
}

namespace detail {
template <PrimeOrderGroup G>
void expect_limbs(const EncryptedValue<G>& v, std::size_t n, const char* what) {
  if (v.limbs.size() != n) throw MalformedStatement(std::string(what) + " has the wrong limb count");
}

template <class Stmt>
Digest statement_digest(const Stmt& s) {
  ByteWriter w;
  w.u8(kEncodingVersion).u8(static_cast<std::uint8_t>(Stmt::kId));
  s.write(w);
  return crypto::hash_tagged("avecq/statement/v1", {w.bytes()});
}
}  // namespace detail

template <PrimeOrderGroup G>
struct ProveQualStatement {
  static constexpr RelationId kId = RelationId::ProveQual;

  Digest params;
  policy::TaskPolicy policy;
  Digest mt_root;
  Element<G> pk_r;
  Element<G> pk_ra;
  CommitmentPair<G> rerandomized;
  Digest tag;
  EncryptedValue<G> answer;
  EncryptedValue<G> address;
  EncryptedValue<G> blind;  // E(pk_R, r_k); bound, not checked

  friend bool operator==(const ProveQualStatement&, const ProveQualStatement&) = default;

  void validate_shape() const {
    detail::expect_limbs(answer, kAnswerLimbs, "answer ciphertext");
    detail::expect_limbs(address, kAddressLimbs, "address ciphertext");
    detail::expect_limbs(blind, kBlindLimbs, "r_k ciphertext");
  }

  void write(ByteWriter& w) const {
    w.raw(params.bytes);
    policy.write(w);
    w.raw(mt_root.bytes);
    crypto::write_element<G>(w, pk_r);
    crypto::write_element<G>(w, pk_ra);
    rerandomized.write(w);
    w.raw(tag.bytes);
    answer.write(w);
    address.write(w);
    blind.write(w);
  }
  static ProveQualStatement read(ByteReader& r) {
    ProveQualStatement s;
    s.params = Digest::read(r);
    s.policy = policy::TaskPolicy::read(r);
    s.mt_root = Digest::read(r);
    s.pk_r = crypto::read_element<G>(r);
    s.pk_ra = crypto::read_element<G>(r);
    s.rerandomized = CommitmentPair<G>::read(r);
    s.tag = Digest::read(r);
    s.answer = EncryptedValue<G>::read(r);
    s.address = EncryptedValue<G>::read(r);
    s.blind = EncryptedValue<G>::read(r);
    return s;
  }
  Digest digest() const { return detail::statement_digest(*this); }
};

template <PrimeOrderGroup G>
struct ProveQualWitness {
  crypto::Signature<G> cert;
  Scalar<G> m;
  policy::QualityState quality;
  ScalarPair<G> r_c;            // opens the stored leaf pair
  ScalarPair<G> r_star;         // this task's rerandomizer
  ScalarPair<G> r_dummy;        // dummy randomness of the update that produced the leaf
  CommitmentPair<G> base;       // posted pair without the dummy; leaf = base + Com(0, r_dummy)
  std::uint32_t answer = 0;
  std::vector<Scalar<G>> answer_rand;
  std::uint32_t address = 0;
  std::vector<Scalar<G>> address_rand;
  merkle::MerklePath path;
};

template <PrimeOrderGroup G>
struct AuthCalcStatement {
  static constexpr RelationId kId = RelationId::AuthCalc;

  Digest params;
  policy::TaskPolicy policy;
  Element<G> pk_r;
  std::vector<EncryptedValue<G>> answers;
  EncryptedValue<G> final_answer;

  friend bool operator==(const AuthCalcStatement&, const AuthCalcStatement&) = default;

  void validate_shape() const {
    if (answers.empty()) throw MalformedStatement("AuthCalc needs at least one answer");
    for (const auto& a : answers) detail::expect_limbs(a, kAnswerLimbs, "answer ciphertext");
    detail::expect_limbs(final_answer, 2 * policy.final_answer_words(), "final answer ciphertext");
  }

  void write(ByteWriter& w) const {
    w.raw(params.bytes);
    policy.write(w);
    crypto::write_element<G>(w, pk_r);
    w.u32(static_cast<std::uint32_t>(answers.size()));
    for (const auto& a : answers) a.write(w);
    final_answer.write(w);
  }
  static AuthCalcStatement read(ByteReader& r) {
    AuthCalcStatement s;
    s.params = Digest::read(r);
    s.policy = policy::TaskPolicy::read(r);
    s.pk_r = crypto::read_element<G>(r);
    auto n = r.u32();
    if (n > r.remaining()) throw EncodingError("answer count exceeds payload");
    for (std::uint32_t i = 0; i < n; ++i) s.answers.push_back(EncryptedValue<G>::read(r));
    s.final_answer = EncryptedValue<G>::read(r);
    return s;
  }
  Digest digest() const { return detail::statement_digest(*this); }
};

template <PrimeOrderGroup G>
struct AuthValueStatement {
  static constexpr RelationId kId = RelationId::AuthValue;

  Digest params;
  policy::TaskPolicy policy;
  Element<G> pk_r;
  EncryptedValue<G> final_answer;
  EncryptedValue<G> answer;

  friend bool operator==(const AuthValueStatement&, const AuthValueStatement&) = default;

  void validate_shape() const {
    detail::expect_limbs(final_answer, 2 * policy.final_answer_words(), "final answer ciphertext");
    detail::expect_limbs(answer, kAnswerLimbs, "answer ciphertext");
  }

  void write(ByteWriter& w) const {
    w.raw(params.bytes);
    policy.write(w);
    crypto::write_element<G>(w, pk_r);
    final_answer.write(w);
    answer.write(w);
  }
  static AuthValueStatement read(ByteReader& r) {
    AuthValueStatement s;
    s.params = Digest::read(r);
    s.policy = policy::TaskPolicy::read(r);
    s.pk_r = crypto::read_element<G>(r);
    s.final_answer = EncryptedValue<G>::read(r);
    s.answer = EncryptedValue<G>::read(r);
    return s;
  }
  Digest digest() const { return detail::statement_digest(*this); }
};

/// Quality update for one worker. Without a final answer (void task) the
/// only admissible increment is zero.
template <PrimeOrderGroup G>
struct AuthQualStatement {
  static constexpr RelationId kId = RelationId::AuthQual;

  Digest params;
  policy::TaskPolicy policy;
  Element<G> pk_r;
  std::optional<EncryptedValue<G>> final_answer;
  EncryptedValue<G> answer;
  CommitmentPair<G> old_pair;
  CommitmentPair<G> new_pair;

  friend bool operator==(const AuthQualStatement&, const AuthQualStatement&) = default;

  void validate_shape() const {
    if (final_answer) detail::expect_limbs(*final_answer, 2 * policy.final_answer_words(), "final answer ciphertext");
    detail::expect_limbs(answer, kAnswerLimbs, "answer ciphertext");
  }

  void write(ByteWriter& w) const {
    w.raw(params.bytes);
    policy.write(w);
    crypto::write_element<G>(w, pk_r);
    w.u8(final_answer ? 1 : 0);
    if (final_answer) final_answer->write(w);
    answer.write(w);
    old_pair.write(w);
    new_pair.write(w);
  }
  static AuthQualStatement read(ByteReader& r) {
    AuthQualStatement s;
    s.params = Digest::read(r);
    s.policy = policy::TaskPolicy::read(r);
    s.pk_r = crypto::read_element<G>(r);
    auto present = r.u8();
    if (present > 1) throw EncodingError("invalid presence flag");
    if (present) s.final_answer = EncryptedValue<G>::read(r);
    s.answer = EncryptedValue<G>::read(r);
    s.old_pair = CommitmentPair<G>::read(r);
    s.new_pair = CommitmentPair<G>::read(r);
    return s;
  }
  Digest digest() const { return detail::statement_digest(*this); }
};

template <PrimeOrderGroup G>
struct RequesterKeyWitness {
  Scalar<G> sk_r;
};

template <PrimeOrderGroup G>
struct AuthQualWitness {
  Scalar<G> sk_r;
  ScalarPair<G> r_r;
};

}  // namespace avecq::relations
