#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

/// Quadratic-residue subgroup of Z_q^* for the safe prime q = 2p + 1 with
/// p = 2147483543. The subgroup has prime order p (about 2^31).
///
/// Discrete logs here are trivial; this group exists so tests can enumerate
/// domains exhaustively. Never use it for anything that must be secure.
struct SmallPrimeGroup {
  static constexpr std::string_view kName = "qr-safe-prime-2^31";
  static constexpr std::uint64_t kOrder = 2147483543ULL;    // p
  static constexpr std::uint64_t kModulus = 4294967087ULL;  // q = 2p + 1
  static constexpr std::size_t kScalarBytes = 4;
  static constexpr std::size_t kElementBytes = 4;

  static constexpr std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t result = 1;
    base %= kModulus;
    while (exp > 0) {
      if (exp & 1) result = result * base % kModulus;
      base = base * base % kModulus;
      exp >>= 1;
    }
    return result;
  }

  class Scalar {
   public:
    constexpr Scalar() = default;

    static constexpr Scalar from_u64(std::uint64_t v) { return Scalar(v % kOrder); }
    static Scalar from_wide(ByteView bytes) {
      // Big-endian Horner over the little-endian input.
      std::uint64_t acc = 0;
      for (auto it = bytes.rbegin(); it != bytes.rend(); ++it) acc = ((acc << 8) | *it) % kOrder;
      return Scalar(acc);
    }
    static std::optional<Scalar> from_canonical(ByteView bytes) {
      if (bytes.size() != kScalarBytes) return std::nullopt;
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < kScalarBytes; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
      if (v >= kOrder) return std::nullopt;
      return Scalar(v);
    }

    Bytes to_bytes() const {
      Bytes out(kScalarBytes);
      for (std::size_t i = 0; i < kScalarBytes; ++i) out[i] = static_cast<std::uint8_t>(v_ >> (8 * i));
      return out;
    }
    constexpr bool is_zero() const { return v_ == 0; }
    constexpr std::uint64_t value() const { return v_; }

    friend constexpr Scalar operator+(Scalar a, Scalar b) { return Scalar((a.v_ + b.v_) % kOrder); }
    friend constexpr Scalar operator-(Scalar a, Scalar b) { return Scalar((a.v_ + kOrder - b.v_) % kOrder); }
    friend constexpr Scalar operator*(Scalar a, Scalar b) { return Scalar(a.v_ * b.v_ % kOrder); }
    constexpr Scalar operator-() const { return Scalar((kOrder - v_) % kOrder); }
    Scalar& operator+=(Scalar o) { return *this = *this + o; }
    Scalar& operator-=(Scalar o) { return *this = *this - o; }

    friend constexpr bool operator==(Scalar, Scalar) = default;

   private:
    constexpr explicit Scalar(std::uint64_t v) : v_(v) {}
    std::uint64_t v_ = 0;
  };

  class Element {
   public:
    /// The identity (residue 1).
    constexpr Element() = default;

    static std::optional<Element> from_canonical(ByteView bytes) {
      if (bytes.size() != kElementBytes) return std::nullopt;
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < kElementBytes; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
      if (v == 0 || v >= kModulus) return std::nullopt;
      if (pow_mod(v, kOrder) != 1) return std::nullopt;  // not a quadratic residue
      return Element(v);
    }

    Bytes to_bytes() const {
      Bytes out(kElementBytes);
      for (std::size_t i = 0; i < kElementBytes; ++i) out[i] = static_cast<std::uint8_t>(v_ >> (8 * i));
      return out;
    }
    constexpr std::uint64_t value() const { return v_; }

    friend constexpr Element operator+(Element a, Element b) { return Element(a.v_ * b.v_ % kModulus); }
    friend constexpr Element operator-(Element a, Element b) { return a + (-b); }
    constexpr Element operator-() const { return Element(pow_mod(v_, kOrder - 1)); }
    Element& operator+=(Element o) { return *this = *this + o; }

    friend constexpr Element operator*(Scalar s, Element e) { return Element(pow_mod(e.v_, s.value())); }

    friend constexpr bool operator==(Element, Element) = default;
    friend constexpr auto operator<=>(Element, Element) = default;

   private:
    friend struct SmallPrimeGroup;
    constexpr explicit Element(std::uint64_t v) : v_(v) {}
    std::uint64_t v_ = 1;
  };

  static constexpr Element generator() { return Element(4); }
  static constexpr Element identity() { return Element(); }

  /// Hash to Z_q, then square into the residue subgroup; retries on 0/±1.
  static Element hash_to_group(ByteView bytes) {
    for (std::uint32_t ctr = 0;; ++ctr) {
      std::array<std::uint8_t, 4> c{};
      for (int i = 0; i < 4; ++i) c[i] = static_cast<std::uint8_t>(ctr >> (8 * i));
      auto d = hash_tagged("avecq/small-group/hash-to-group/v1", {bytes, c});
      std::uint64_t x = 0;
      for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
      x %= kModulus;
      std::uint64_t y = x * x % kModulus;
      if (y > 1) return Element(y);
    }
  }
};

}  // namespace avecq::crypto
