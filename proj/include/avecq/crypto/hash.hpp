#pragma once

#include <sodium.h>

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "avecq/common/bytes.hpp"

namespace avecq::crypto {

namespace detail {
inline void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw Error("libsodium failed to initialise");
    return true;
  }();
  (void)ready;
}
}  // namespace detail

/// 256-bit digest (the security parameter is fixed at 256 bits).
struct Digest {
  static constexpr std::size_t kSize = crypto_hash_sha256_BYTES;
  std::array<std::uint8_t, kSize> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const { return to_hex(bytes); }
  static Digest from_hex(std::string_view hex) {
    auto raw = avecq::from_hex(hex);
    if (raw.size() != kSize) throw EncodingError("digest must be 32 bytes");
    Digest d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
  }
  static Digest read(ByteReader& r) {
    Digest d;
    auto s = r.raw(kSize);
    std::copy(s.begin(), s.end(), d.bytes.begin());
    return d;
  }
};

/// SHA-256 over the raw bytes.
inline Digest hash(ByteView data) {
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

/// SHA-256 with a length-prefixed domain-separation tag in front of the parts.
inline Digest hash_tagged(std::string_view tag, std::initializer_list<ByteView> parts) {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  std::uint8_t len[4];
  for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(tag.size() >> (8 * i));
  crypto_hash_sha256_update(&st, len, sizeof len);
  crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
  for (auto p : parts) crypto_hash_sha256_update(&st, p.data(), p.size());
  Digest d;
  crypto_hash_sha256_final(&st, d.bytes.data());
  return d;
}

/// 512-bit tagged hash, used wherever a uniform scalar or group element is derived.
inline std::array<std::uint8_t, 64> wide_hash_tagged(std::string_view tag,
                                                     std::initializer_list<ByteView> parts) {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  std::uint8_t len[4];
  for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(tag.size() >> (8 * i));
  crypto_hash_sha512_update(&st, len, sizeof len);
  crypto_hash_sha512_update(&st, reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
  for (auto p : parts) crypto_hash_sha512_update(&st, p.data(), p.size());
  std::array<std::uint8_t, 64> out{};
  crypto_hash_sha512_final(&st, out.data());
  return out;
}

}  // namespace avecq::crypto
