#pragma once

#include <nlohmann/json.hpp>

#include <array>

#include "avecq/crypto/elgamal.hpp"
#include "avecq/relations/checkers.hpp"

namespace avecq::relations {

/// Serialized as id || statement digest || attestation.
struct Proof {
  RelationId id = RelationId::ProveQual;
  Digest statement;
  Bytes attestation;

  friend bool operator==(const Proof&, const Proof&) = default;

  void write(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(id)).raw(statement.bytes).blob(attestation);
  }
  static Proof read(ByteReader& r) {
    Proof p;
    auto id = r.u8();
    if (id < 1 || id > 4) throw EncodingError("unknown relation id");
    p.id = static_cast<RelationId>(id);
    p.statement = Digest::read(r);
    p.attestation = r.blob();
    return p;
  }
  Bytes to_bytes() const {
    ByteWriter w;
    write(w);
    return std::move(w).bytes();
  }
};

/// Public verification keys, one per relation.
template <PrimeOrderGroup G>
struct BackendParameters {
  std::array<Element<G>, 4> keys;

  const Element<G>& key(RelationId id) const { return keys.at(static_cast<std::size_t>(id) - 1); }

  Digest digest() const {
    ByteWriter w;
    w.u8(kEncodingVersion).str(G::kName);
    for (const auto& k : keys) crypto::write_element<G>(w, k);
    return crypto::hash_tagged("avecq/backend-params/v1", {w.bytes()});
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < keys.size(); ++i)
      j[to_string(static_cast<RelationId>(i + 1))] = to_hex(keys[i].to_bytes());
    return j;
  }
  static BackendParameters from_json(const nlohmann::ordered_json& j) {
    BackendParameters p;
    for (std::size_t i = 0; i < p.keys.size(); ++i) {
      auto raw = from_hex(j.at(to_string(static_cast<RelationId>(i + 1))).template get<std::string>());
      auto e = Element<G>::from_canonical(raw);
      if (!e) throw EncodingError("backend key is not a group element");
      p.keys[i] = *e;
    }
    return p;
  }
};

namespace detail {
inline Bytes attestation_message(RelationId id, const Digest& stmt) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(id)).raw(stmt.bytes);
  return std::move(w).bytes();
}
}  // namespace detail

/// Direct-evaluation backend: prove runs the relation checker and, on
/// acceptance, signs (relation id, statement digest) with that relation's
/// setup key. The attestation is a function of the statement only.
template <PrimeOrderGroup G>
class AttestationBackend {
 public:
  static AttestationBackend setup(ByteView seed) {
    crypto::Drbg rng(seed);
    AttestationBackend b;
    for (std::size_t i = 0; i < b.secrets_.size(); ++i) {
      auto kp = crypto::keygen<G>(rng);
      b.secrets_[i] = kp.sk;
      b.params_.keys[i] = kp.pk;
    }
    return b;
  }

  const BackendParameters<G>& parameters() const { return params_; }

  /// Throws RelationUnsatisfied when the checker rejects.
  template <class Stmt, class Wit>
  Proof prove(const Stmt& x, const Wit& w) const {
    if (!check(x, w))
      throw RelationUnsatisfied(std::string("witness does not satisfy ") + to_string(Stmt::kId));
    auto digest = x.digest();
    const auto& sk = secrets_.at(static_cast<std::size_t>(Stmt::kId) - 1);
    auto sig = crypto::sign<G>(sk, detail::attestation_message(Stmt::kId, digest));
    return {Stmt::kId, digest, sig.to_bytes()};
  }

 private:
  std::array<Scalar<G>, 4> secrets_{};
  BackendParameters<G> params_{};
};

template <PrimeOrderGroup G, class Stmt>
bool verify(const BackendParameters<G>& params, const Stmt& x, const Proof& proof) {
  if (proof.id != Stmt::kId) return false;
  auto digest = x.digest();
  if (proof.statement != digest) return false;
  try {
    ByteReader r(proof.attestation);
    auto sig = crypto::Signature<G>::read(r);
    r.expect_end();
    return crypto::verify_sig<G>(params.key(Stmt::kId), detail::attestation_message(Stmt::kId, digest), sig);
  } catch (const EncodingError&) {
    return false;
  }
}

}  // namespace avecq::relations
