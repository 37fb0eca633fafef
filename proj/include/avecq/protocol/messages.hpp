#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <vector>

#include "avecq/relations/backend.hpp"

namespace avecq::protocol {

using crypto::CommitmentPair;
using crypto::Digest;
using crypto::Element;
using crypto::EncryptedValue;
using crypto::PrimeOrderGroup;
using crypto::Scalar;
using crypto::ScalarPair;
using relations::Proof;

/// Per-task blinding secret r_k, sent to the requester encrypted.
using BlindKey = std::array<std::uint8_t, 16>;

/// The scalar added to blinded randomness.
template <PrimeOrderGroup G>
Scalar<G> blind_scalar(const BlindKey& rk) {
  return Scalar<G>::from_wide(crypto::wide_hash_tagged("avecq/blind/scalar/v1", {rk}));
}
/// The integer added (mod 2^32) to a blinded leaf position.
inline std::uint32_t blind_offset(const BlindKey& rk) {
  return static_cast<std::uint32_t>(rk[0]) | (static_cast<std::uint32_t>(rk[1]) << 8) |
         (static_cast<std::uint32_t>(rk[2]) << 16) | (static_cast<std::uint32_t>(rk[3]) << 24);
}
/// H(r_k), the index a worker uses to find its quality post.
inline Digest blind_index(const BlindKey& rk) { return crypto::hash_tagged("avecq/blind/index/v1", {rk}); }

/// SubmitResponse payload. mt_root names the published root the membership
/// proof was made against.
template <PrimeOrderGroup G>
struct ResponseTuple {
  Digest mt_root;
  EncryptedValue<G> answer;
  EncryptedValue<G> address;
  CommitmentPair<G> rerandomized;
  EncryptedValue<G> blind;
  Digest tag;
  Proof proof;

  friend bool operator==(const ResponseTuple&, const ResponseTuple&) = default;

  void write(ByteWriter& w) const {
    w.u8(kEncodingVersion).raw(mt_root.bytes);
    answer.write(w);
    address.write(w);
    rerandomized.write(w);
    blind.write(w);
    w.raw(tag.bytes);
    proof.write(w);
  }
  static ResponseTuple read(ByteReader& r) {
    if (r.u8() != kEncodingVersion) throw EncodingError("unsupported response version");
    ResponseTuple t;
    t.mt_root = Digest::read(r);
    t.answer = EncryptedValue<G>::read(r);
    t.address = EncryptedValue<G>::read(r);
    t.rerandomized = CommitmentPair<G>::read(r);
    t.blind = EncryptedValue<G>::read(r);
    t.tag = Digest::read(r);
    t.proof = Proof::read(r);
    return t;
  }
  Bytes to_bytes() const {
    ByteWriter w;
    write(w);
    return std::move(w).bytes();
  }
  static ResponseTuple from_bytes(ByteView b) {
    ByteReader r(b);
    auto t = read(r);
    r.expect_end();
    return t;
  }

  /// Statement the ProveQual proof must be about.
  relations::ProveQualStatement<G> statement(const Digest& params, const policy::TaskPolicy& p,
                                             const Element<G>& pk_r, const Element<G>& pk_ra) const {
    return {params, p, mt_root, pk_r, pk_ra, rerandomized, tag, answer, address, blind};
  }
};

/// SubmitQuality payload for one surviving response.
template <PrimeOrderGroup G>
struct QualityPost {
  std::uint64_t response = 0;  // seq of the SubmitResponse it answers
  Digest index;                // H(r_k)
  ScalarPair<G> blinded_r_r;   // r_R + r_k
  ScalarPair<G> blinded_r_dummy;  // r_** + r_k
  CommitmentPair<G> new_pair;  // rerandomized + Com(mu, r_R), without the dummy
  std::uint32_t blinded_pos = 0;  // pos + r_k mod 2^32
  Proof auth_qual;
  std::optional<Proof> auth_value;

  friend bool operator==(const QualityPost&, const QualityPost&) = default;

  void write(ByteWriter& w) const {
    w.u8(kEncodingVersion).u64(response).raw(index.bytes);
    blinded_r_r.write(w);
    blinded_r_dummy.write(w);
    new_pair.write(w);
    w.u32(blinded_pos);
    auth_qual.write(w);
    w.u8(auth_value ? 1 : 0);
    if (auth_value) auth_value->write(w);
  }
  static QualityPost read(ByteReader& r) {
    if (r.u8() != kEncodingVersion) throw EncodingError("unsupported quality post version");
    QualityPost q;
    q.response = r.u64();
    q.index = Digest::read(r);
    q.blinded_r_r = ScalarPair<G>::read(r);
    q.blinded_r_dummy = ScalarPair<G>::read(r);
    q.new_pair = CommitmentPair<G>::read(r);
    q.blinded_pos = r.u32();
    q.auth_qual = Proof::read(r);
    auto flag = r.u8();
    if (flag > 1) throw EncodingError("invalid presence flag");
    if (flag) q.auth_value = Proof::read(r);
    return q;
  }
  Bytes to_bytes() const {
    ByteWriter w;
    write(w);
    return std::move(w).bytes();
  }
  static QualityPost from_bytes(ByteView b) {
    ByteReader r(b);
    auto q = read(r);
    r.expect_end();
    return q;
  }
};

/// SubmitAuthCalc payload. The first byte is the ledger's AuthCalcKind; a
/// void post carries the participant list but no final answer.
template <PrimeOrderGroup G>
struct AuthCalcPost {
  bool is_void = false;
  std::vector<std::uint64_t> responses;  // surviving response seqs, in order
  EncryptedValue<G> final_answer;
  std::optional<Proof> proof;

  friend bool operator==(const AuthCalcPost&, const AuthCalcPost&) = default;

  Bytes to_bytes() const {
    ByteWriter w;
    w.u8(is_void ? 1 : 0).u8(kEncodingVersion).u32(static_cast<std::uint32_t>(responses.size()));
    for (auto s : responses) w.u64(s);
    if (!is_void) {
      final_answer.write(w);
      proof.value().write(w);
    }
    return std::move(w).bytes();
  }
  static AuthCalcPost from_bytes(ByteView b) {
    ByteReader r(b);
    AuthCalcPost p;
    auto kind = r.u8();
    if (kind > 1) throw EncodingError("unknown final-answer kind");
    p.is_void = kind == 1;
    if (r.u8() != kEncodingVersion) throw EncodingError("unsupported final-answer version");
    auto n = r.u32();
    if (n > r.remaining() / 8) throw EncodingError("response count exceeds payload");
    for (std::uint32_t i = 0; i < n; ++i) p.responses.push_back(r.u64());
    if (!p.is_void) {
      p.final_answer = EncryptedValue<G>::read(r);
      p.proof = Proof::read(r);
    }
    r.expect_end();
    return p;
  }
};

enum class ClaimKind : std::uint8_t { BadQuality = 1, Deprivation = 2 };

inline const char* to_string(ClaimKind k) { return k == ClaimKind::BadQuality ? "bad_quality" : "deprivation"; }

/// What a worker hands the RA: its own response, the opening of the payment
/// address it wants compensation sent to, and the post it disputes (if any).
template <PrimeOrderGroup G>
struct ProtestEvidence {
  std::uint32_t contract = 0;
  ClaimKind claim = ClaimKind::Deprivation;
  std::uint64_t response = 0;
  ResponseTuple<G> tuple;
  std::uint32_t address = 0;
  std::vector<Scalar<G>> address_rand;
  std::optional<std::uint64_t> post;
  std::optional<QualityPost<G>> posted;

  Bytes to_bytes() const {
    ByteWriter w;
    w.u8(kEncodingVersion).u32(contract).u8(static_cast<std::uint8_t>(claim)).u64(response);
    tuple.write(w);
    w.u32(address).u32(static_cast<std::uint32_t>(address_rand.size()));
    for (const auto& s : address_rand) crypto::write_scalar<G>(w, s);
    w.u8(post ? 1 : 0);
    if (post) {
      w.u64(*post);
      posted.value().write(w);
    }
    return std::move(w).bytes();
  }
  static ProtestEvidence from_bytes(ByteView b) {
    try {
      ByteReader r(b);
      ProtestEvidence e;
      if (r.u8() != kEncodingVersion) throw EncodingError("unsupported evidence version");
      e.contract = r.u32();
      auto claim = r.u8();
      if (claim < 1 || claim > 2) throw EncodingError("unknown claim kind");
      e.claim = static_cast<ClaimKind>(claim);
      e.response = r.u64();
      e.tuple = ResponseTuple<G>::read(r);
      e.address = r.u32();
      auto n = r.u32();
      if (n > relations::kAddressLimbs) throw EncodingError("too many address scalars");
      for (std::uint32_t i = 0; i < n; ++i) e.address_rand.push_back(crypto::read_scalar<G>(r));
      auto flag = r.u8();
      if (flag > 1) throw EncodingError("invalid presence flag");
      if (flag) {
        e.post = r.u64();
        e.posted = QualityPost<G>::read(r);
      }
      r.expect_end();
      return e;
    } catch (const EncodingError& err) {
      throw MalformedEvidence(err.what());
    }
  }
};

}  // namespace avecq::protocol
