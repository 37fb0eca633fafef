#pragma once

#include <sodium.h>

#include <algorithm>
#include <array>
#include <compare>
#include <cstring>
#include <optional>
#include <string_view>

#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

/// The ristretto255 prime-order group (order 2^252 + 27742317777372353535851937790883648493),
/// backed by libsodium. This is the production instantiation.
struct Ristretto255 {
  static constexpr std::string_view kName = "ristretto255";
  static constexpr std::size_t kScalarBytes = crypto_core_ristretto255_SCALARBYTES;
  static constexpr std::size_t kElementBytes = crypto_core_ristretto255_BYTES;

  class Scalar {
   public:
    Scalar() = default;

    static Scalar from_u64(std::uint64_t v) {
      Scalar s;
      for (int i = 0; i < 8; ++i) s.b_[i] = static_cast<std::uint8_t>(v >> (8 * i));
      return s;
    }
    /// Reduces up to 64 little-endian bytes modulo the group order.
    static Scalar from_wide(ByteView bytes) {
      if (bytes.size() > crypto_core_ristretto255_NONREDUCEDSCALARBYTES)
        throw EncodingError("wide scalar input exceeds 64 bytes");
      std::array<std::uint8_t, crypto_core_ristretto255_NONREDUCEDSCALARBYTES> wide{};
      std::copy(bytes.begin(), bytes.end(), wide.begin());
      Scalar s;
      crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide.data());
      return s;
    }
    static std::optional<Scalar> from_canonical(ByteView bytes) {
      if (bytes.size() != kScalarBytes) return std::nullopt;
      Scalar s = from_wide(bytes);
      if (!std::equal(bytes.begin(), bytes.end(), s.b_.begin())) return std::nullopt;
      return s;
    }

    Bytes to_bytes() const { return {b_.begin(), b_.end()}; }
    bool is_zero() const { return sodium_is_zero(b_.data(), b_.size()) == 1; }
    const std::uint8_t* data() const { return b_.data(); }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
      Scalar r;
      crypto_core_ristretto255_scalar_add(r.b_.data(), a.b_.data(), b.b_.data());
      return r;
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) {
      Scalar r;
      crypto_core_ristretto255_scalar_sub(r.b_.data(), a.b_.data(), b.b_.data());
      return r;
    }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
      Scalar r;
      crypto_core_ristretto255_scalar_mul(r.b_.data(), a.b_.data(), b.b_.data());
      return r;
    }
    Scalar operator-() const {
      Scalar r;
      crypto_core_ristretto255_scalar_negate(r.b_.data(), b_.data());
      return r;
    }
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }

    friend bool operator==(const Scalar&, const Scalar&) = default;

   private:
    std::array<std::uint8_t, kScalarBytes> b_{};
  };

  class Element {
   public:
    /// The identity (all-zero encoding).
    Element() = default;

    static std::optional<Element> from_canonical(ByteView bytes) {
      if (bytes.size() != kElementBytes) return std::nullopt;
      if (crypto_core_ristretto255_is_valid_point(bytes.data()) != 1) return std::nullopt;
      Element e;
      std::copy(bytes.begin(), bytes.end(), e.b_.begin());
      return e;
    }

    Bytes to_bytes() const { return {b_.begin(), b_.end()}; }
    const std::array<std::uint8_t, kElementBytes>& raw() const { return b_; }

    friend Element operator+(const Element& a, const Element& b) {
      if (a.is_identity()) return b;
      if (b.is_identity()) return a;
      Element r;
      (void)crypto_core_ristretto255_add(r.b_.data(), a.b_.data(), b.b_.data());
      return r;
    }
    friend Element operator-(const Element& a, const Element& b) {
      if (b.is_identity()) return a;
      Element r;
      (void)crypto_core_ristretto255_sub(r.b_.data(), a.b_.data(), b.b_.data());
      return r;
    }
    Element operator-() const { return Element{} - *this; }
    Element& operator+=(const Element& o) { return *this = *this + o; }

    friend Element operator*(const Scalar& s, const Element& e) {
      Element r;
      if (s.is_zero() || e.is_identity()) return r;
      // A zero result makes libsodium return -1 but still writes the identity encoding.
      [[maybe_unused]] int rc = e == generator()
                                    ? crypto_scalarmult_ristretto255_base(r.b_.data(), s.data())
                                    : crypto_scalarmult_ristretto255(r.b_.data(), s.data(), e.b_.data());
      return r;
    }

    bool is_identity() const { return sodium_is_zero(b_.data(), b_.size()) == 1; }

    friend bool operator==(const Element&, const Element&) = default;
    friend auto operator<=>(const Element&, const Element&) = default;

   private:
    friend struct Ristretto255;
    std::array<std::uint8_t, kElementBytes> b_{};
  };

  static const Element& generator() {
    static const Element g = [] {
      detail::ensure_sodium();
      Element e;
      auto one = Scalar::from_u64(1);
      [[maybe_unused]] int rc = crypto_scalarmult_ristretto255_base(e.b_.data(), one.data());
      return e;
    }();
    return g;
  }

  static Element identity() { return Element{}; }

  /// Elligator-based hash-to-group over a SHA-512 of the domain-tagged input.
  static Element hash_to_group(ByteView bytes) {
    detail::ensure_sodium();
    auto wide = wide_hash_tagged("avecq/ristretto255/hash-to-group/v1", {bytes});
    Element e;
    crypto_core_ristretto255_from_hash(e.b_.data(), wide.data());
    return e;
  }
};

}  // namespace avecq::crypto
