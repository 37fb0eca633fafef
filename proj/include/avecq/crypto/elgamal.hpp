#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "avecq/crypto/drbg.hpp"
#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

template <PrimeOrderGroup G>
struct KeyPair {
  Scalar<G> sk;
  Element<G> pk;
};

/// Deterministic key generation: sk = H512(tag || seed) mod p, pk = sk*G.
template <PrimeOrderGroup G>
KeyPair<G> keygen(ByteView seed) {
  if (seed.empty()) throw DomainError("keygen requires a nonempty seed");
  auto wide = wide_hash_tagged("avecq/keygen/v1", {seed});
  auto sk = Scalar<G>::from_wide(wide);
  return {sk, sk * G::generator()};
}

template <PrimeOrderGroup G>
KeyPair<G> keygen(Drbg& rng) {
  auto seed = rng.bytes<32>();
  return keygen<G>(seed);
}

template <PrimeOrderGroup G>
bool valid_key_pair(const Element<G>& pk, const Scalar<G>& sk) {
  return sk * G::generator() == pk;
}

/// Maps 16-bit message limbs to points, P_x = x*G, and back through a
/// precomputed table of all 2^16 multiples. Wider messages are split into
/// limbs and each limb is encrypted separately.
template <PrimeOrderGroup G>
class LimbCodec {
 public:
  static constexpr unsigned kLimbBits = 16;
  static constexpr std::uint32_t kDomainSize = 1u << kLimbBits;
  /// Bumped whenever the limb width or point mapping changes.
  static constexpr std::uint32_t kVersion = 1;

  static const LimbCodec& instance() {
    static const LimbCodec codec;
    return codec;
  }

  static Element<G> forward(std::uint32_t limb) {
    if (limb >= kDomainSize) throw DomainError("message limb outside the 16-bit codec domain");
    return Scalar<G>::from_u64(limb) * G::generator();
  }

  std::optional<std::uint32_t> inverse(const Element<G>& p) const {
    Key key = key_of(p);
    auto it = std::lower_bound(table_.begin(), table_.end(), key,
                               [](const Entry& e, const Key& k) { return e.first < k; });
    if (it == table_.end() || it->first != key) return std::nullopt;
    return it->second;
  }

 private:
  using Key = std::array<std::uint8_t, G::kElementBytes>;
  using Entry = std::pair<Key, std::uint32_t>;

  static Key key_of(const Element<G>& p) {
    Key k{};
    auto b = p.to_bytes();
    std::copy(b.begin(), b.end(), k.begin());
    return k;
  }

  LimbCodec() {
    table_.reserve(kDomainSize);
    Element<G> acc = G::identity();
    const Element<G> g = G::generator();
    for (std::uint32_t i = 0; i < kDomainSize; ++i) {
      table_.emplace_back(key_of(acc), i);
      acc = acc + g;
    }
    std::sort(table_.begin(), table_.end());
  }

  std::vector<Entry> table_;
};

template <PrimeOrderGroup G>
struct Ciphertext {
  Element<G> c1;  // r*G
  Element<G> c2;  // P_x + r*pk

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

  void write(ByteWriter& w) const {
    write_element<G>(w, c1);
    write_element<G>(w, c2);
  }
  static Ciphertext read(ByteReader& r) {
    auto a = read_element<G>(r);
    auto b = read_element<G>(r);
    return {a, b};
  }
};

/// ElGamal over a single 16-bit limb: (r*G, P_x + r*pk).
template <PrimeOrderGroup G>
Ciphertext<G> encrypt(const Element<G>& pk, std::uint32_t x, const Scalar<G>& r) {
  return {r * G::generator(), LimbCodec<G>::forward(x) + r * pk};
}

/// Recovers x from c2 - sk*c1; throws CodecError when the point is outside the codec range.
template <PrimeOrderGroup G>
std::uint32_t decrypt(const Scalar<G>& sk, const Ciphertext<G>& ct) {
  auto point = ct.c2 - sk * ct.c1;
  auto x = LimbCodec<G>::instance().inverse(point);
  if (!x) throw CodecError("decrypted point is outside the message codec domain");
  return *x;
}

/// A multi-limb ciphertext; limb i carries bits [16i, 16i+16) of the message.
template <PrimeOrderGroup G>
struct EncryptedValue {
  std::vector<Ciphertext<G>> limbs;

  friend bool operator==(const EncryptedValue&, const EncryptedValue&) = default;

  void write(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(limbs.size()));
    for (const auto& c : limbs) c.write(w);
  }
  static EncryptedValue read(ByteReader& r) {
    EncryptedValue v;
    auto n = r.u8();
    v.limbs.reserve(n);
    for (unsigned i = 0; i < n; ++i) v.limbs.push_back(Ciphertext<G>::read(r));
    return v;
  }
};

using Limbs = std::vector<std::uint32_t>;

inline Limbs u32_limbs(std::uint32_t v) { return {v & 0xffffu, v >> 16}; }
inline std::uint32_t limbs_to_u32(std::span<const std::uint32_t> limbs) {
  if (limbs.size() != 2) throw CodecError("a 32-bit word needs exactly two limbs");
  return limbs[0] | (limbs[1] << 16);
}

/// Two limbs per 32-bit word.
inline Limbs words_to_limbs(std::span<const std::uint32_t> words) {
  Limbs out;
  out.reserve(words.size() * 2);
  for (auto w : words) {
    out.push_back(w & 0xffffu);
    out.push_back(w >> 16);
  }
  return out;
}
inline std::vector<std::uint32_t> limbs_to_words(std::span<const std::uint32_t> limbs) {
  if (limbs.size() % 2 != 0) throw CodecError("word encoding needs an even limb count");
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < limbs.size(); i += 2) out.push_back(limbs[i] | (limbs[i + 1] << 16));
  return out;
}

template <std::size_t N>
Limbs bytes_to_limbs(const std::array<std::uint8_t, N>& bytes) {
  static_assert(N % 2 == 0);
  Limbs out;
  for (std::size_t i = 0; i < N; i += 2) out.push_back(bytes[i] | (static_cast<std::uint32_t>(bytes[i + 1]) << 8));
  return out;
}
template <std::size_t N>
std::array<std::uint8_t, N> limbs_to_bytes(std::span<const std::uint32_t> limbs) {
  if (limbs.size() * 2 != N) throw CodecError("limb count does not match byte width");
  std::array<std::uint8_t, N> out{};
  for (std::size_t i = 0; i < limbs.size(); ++i) {
    out[2 * i] = static_cast<std::uint8_t>(limbs[i]);
    out[2 * i + 1] = static_cast<std::uint8_t>(limbs[i] >> 8);
  }
  return out;
}

template <PrimeOrderGroup G>
EncryptedValue<G> encrypt_limbs(const Element<G>& pk, std::span<const std::uint32_t> limbs,
                                std::span<const Scalar<G>> randomness) {
  if (limbs.size() != randomness.size()) throw DomainError("one randomness scalar is needed per limb");
  EncryptedValue<G> out;
  out.limbs.reserve(limbs.size());
  for (std::size_t i = 0; i < limbs.size(); ++i) out.limbs.push_back(encrypt<G>(pk, limbs[i], randomness[i]));
  return out;
}

template <PrimeOrderGroup G>
Limbs decrypt_limbs(const Scalar<G>& sk, const EncryptedValue<G>& ct) {
  Limbs out;
  out.reserve(ct.limbs.size());
  for (const auto& c : ct.limbs) out.push_back(decrypt<G>(sk, c));
  return out;
}

}  // namespace avecq::crypto
