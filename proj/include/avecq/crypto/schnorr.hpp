#pragma once

#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

template <PrimeOrderGroup G>
struct Signature {
  Element<G> R;
  Scalar<G> S;

  friend bool operator==(const Signature&, const Signature&) = default;

  void write(ByteWriter& w) const {
    write_element<G>(w, R);
    write_scalar<G>(w, S);
  }
  static Signature read(ByteReader& r) {
    auto R = read_element<G>(r);
    auto S = read_scalar<G>(r);
    return {R, S};
  }
  Bytes to_bytes() const {
    ByteWriter w;
    write(w);
    return std::move(w).bytes();
  }
};

namespace detail {
/// EdDSA-style challenge over (R, pk, m).
template <PrimeOrderGroup G>
Scalar<G> challenge(const Element<G>& R, const Element<G>& pk, ByteView m) {
  auto r_bytes = R.to_bytes();
  auto pk_bytes = pk.to_bytes();
  return Scalar<G>::from_wide(wide_hash_tagged("avecq/schnorr/challenge/v1", {r_bytes, pk_bytes, m}));
}
}  // namespace detail

/// Schnorr signature S = r + c*sk, R = r*G with the nonce r derived from (sk, m).
template <PrimeOrderGroup G>
Signature<G> sign(const Scalar<G>& sk, ByteView m) {
  auto sk_bytes = sk.to_bytes();
  auto nonce = Scalar<G>::from_wide(wide_hash_tagged("avecq/schnorr/nonce/v1", {sk_bytes, m}));
  Element<G> R = nonce * G::generator();
  Element<G> pk = sk * G::generator();
  return {R, nonce + detail::challenge<G>(R, pk, m) * sk};
}

/// Accepts iff S*G == R + c*pk.
template <PrimeOrderGroup G>
bool verify_sig(const Element<G>& pk, ByteView m, const Signature<G>& sig) {
  return sig.S * G::generator() == sig.R + detail::challenge<G>(sig.R, pk, m) * pk;
}

}  // namespace avecq::crypto
