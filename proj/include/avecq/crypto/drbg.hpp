#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

/// Deterministic random bit generator: ChaCha20 keystream keyed by a
/// SHA-256 chain over (seed, counter). Every simulated party owns one, forked
/// from the scenario seed, so a fixed seed fixes the whole run.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class Drbg {
 public:
  using result_type = std::uint64_t;

  explicit Drbg(ByteView seed) : key_(hash_tagged("avecq/drbg/seed", {seed})) {
    detail::ensure_sodium();
  }
  explicit Drbg(std::uint64_t seed) : Drbg(encode_u64(seed)) {}

  /// Independent child stream; the parent is left untouched.
  Drbg fork(std::string_view label) const {
    return Drbg(FromKey{}, hash_tagged("avecq/drbg/fork", {key_.bytes, as_bytes(label)}));
  }
  Drbg fork(std::string_view label, std::uint64_t index) const {
    auto idx = encode_u64(index);
    return Drbg(FromKey{}, hash_tagged("avecq/drbg/fork", {key_.bytes, as_bytes(label), idx}));
  }

  void fill(std::span<std::uint8_t> out) {
    auto block_key = hash_tagged("avecq/drbg/block", {key_.bytes, encode_u64(counter_++)});
    static_assert(Digest::kSize == randombytes_SEEDBYTES);
    randombytes_buf_deterministic(out.data(), out.size(), block_key.bytes.data());
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

  result_type operator()() {
    auto b = bytes<8>();
    result_type v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<result_type>(b[i]) << (8 * i);
    return v;
  }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw DomainError("Drbg::below requires a positive bound");
    const std::uint64_t limit = max() - (max() % bound);
    for (;;) {
      auto v = (*this)();
      if (v < limit) return v % bound;
    }
  }

 private:
  struct FromKey {};
  Drbg(FromKey, const Digest& key) : key_(key) {}

  static std::array<std::uint8_t, 8> encode_u64(std::uint64_t v) {
    std::array<std::uint8_t, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return b;
  }

  Digest key_;
  std::uint64_t counter_ = 0;
};

/// Uniform scalar from 64 bytes of DRBG output.
template <PrimeOrderGroup G>
Scalar<G> random_scalar(Drbg& rng) {
  auto wide = rng.bytes<64>();
  return Scalar<G>::from_wide(wide);
}

template <PrimeOrderGroup G>
std::vector<Scalar<G>> random_scalars(Drbg& rng, std::size_t n) {
  std::vector<Scalar<G>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_scalar<G>(rng));
  return out;
}

}  // namespace avecq::crypto
