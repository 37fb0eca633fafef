#pragma once

#include <cstdint>

#include "avecq/crypto/group.hpp"
#include "avecq/crypto/hash.hpp"

namespace avecq::crypto {

inline constexpr std::string_view kPedersenHTag = "avecq/pedersen/H/v1";

/// The two public commitment generators. H is hashed from the encoding of G
/// under a fixed tag, so nobody knows log_G(H).
template <PrimeOrderGroup G>
struct Generators {
  Element<G> g;
  Element<G> h;

  static const Generators& standard() {
    static const Generators gens = [] {
      Element<G> g = G::generator();
      auto g_bytes = g.to_bytes();
      ByteWriter w;
      w.str(kPedersenHTag).raw(g_bytes);
      return Generators{g, G::hash_to_group(w.bytes())};
    }();
    return gens;
  }
};

template <PrimeOrderGroup G>
struct Commitment {
  Element<G> point;

  friend bool operator==(const Commitment&, const Commitment&) = default;
  friend Commitment operator+(const Commitment& a, const Commitment& b) { return {a.point + b.point}; }

  Bytes to_bytes() const { return point.to_bytes(); }
  void write(ByteWriter& w) const { write_element<G>(w, point); }
  static Commitment read(ByteReader& r) { return {read_element<G>(r)}; }
};

/// Com(x, r) = x*G + r*H.
template <PrimeOrderGroup G>
Commitment<G> commit(const Scalar<G>& x, const Scalar<G>& r) {
  const auto& gens = Generators<G>::standard();
  return {x * gens.g + r * gens.h};
}

template <PrimeOrderGroup G>
Commitment<G> commit_add(const Commitment<G>& a, const Commitment<G>& b) {
  return a + b;
}

template <PrimeOrderGroup G>
bool open_check(const Commitment<G>& c, const Scalar<G>& x, const Scalar<G>& r) {
  return c == commit<G>(x, r);
}

/// Randomness for the (alpha, beta) commitment pair.
template <PrimeOrderGroup G>
struct ScalarPair {
  Scalar<G> alpha;
  Scalar<G> beta;

  friend bool operator==(const ScalarPair&, const ScalarPair&) = default;
  friend ScalarPair operator+(const ScalarPair& a, const ScalarPair& b) {
    return {a.alpha + b.alpha, a.beta + b.beta};
  }
  friend ScalarPair operator-(const ScalarPair& a, const ScalarPair& b) {
    return {a.alpha - b.alpha, a.beta - b.beta};
  }
  /// Adds the same scalar to both components.
  ScalarPair shifted(const Scalar<G>& s) const { return {alpha + s, beta + s}; }

  void write(ByteWriter& w) const {
    write_scalar<G>(w, alpha);
    write_scalar<G>(w, beta);
  }
  static ScalarPair read(ByteReader& r) {
    auto a = read_scalar<G>(r);
    auto b = read_scalar<G>(r);
    return {a, b};
  }
};

/// A quality is committed as the ordered pair (Com(alpha, r_a), Com(beta, r_b)).
template <PrimeOrderGroup G>
struct CommitmentPair {
  Commitment<G> alpha;
  Commitment<G> beta;

  friend bool operator==(const CommitmentPair&, const CommitmentPair&) = default;
  friend CommitmentPair operator+(const CommitmentPair& a, const CommitmentPair& b) {
    return {a.alpha + b.alpha, a.beta + b.beta};
  }

  /// Canonical encoding: alpha point then beta point.
  Bytes to_bytes() const {
    ByteWriter w;
    write(w);
    return std::move(w).bytes();
  }
  void write(ByteWriter& w) const {
    alpha.write(w);
    beta.write(w);
  }
  static CommitmentPair read(ByteReader& r) {
    auto a = Commitment<G>::read(r);
    auto b = Commitment<G>::read(r);
    return {a, b};
  }
};

template <PrimeOrderGroup G>
CommitmentPair<G> commit_pair(std::uint64_t alpha, std::uint64_t beta, const ScalarPair<G>& r) {
  return {commit<G>(Scalar<G>::from_u64(alpha), r.alpha), commit<G>(Scalar<G>::from_u64(beta), r.beta)};
}

template <PrimeOrderGroup G>
bool open_check_pair(const CommitmentPair<G>& c, std::uint64_t alpha, std::uint64_t beta,
                     const ScalarPair<G>& r) {
  return c == commit_pair<G>(alpha, beta, r);
}

}  // namespace avecq::crypto
