#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "avecq/common/bytes.hpp"

namespace avecq::crypto {

/// A cyclic group of prime order p with a fixed generator, written additively.
///
/// Scalars live in Z_p; elements support +, -, negation, and scalar
/// multiplication `s * e`. Both types carry a pinned fixed-width canonical
/// encoding (`to_bytes` / `from_canonical`), which every hash, tag and
/// statement digest is computed over.
template <class G>
concept PrimeOrderGroup = requires(const typename G::Scalar& s, const typename G::Element& e,
                                   ByteView bytes, std::uint64_t small) {
  { G::kName } -> std::convertible_to<std::string_view>;
  { G::kScalarBytes } -> std::convertible_to<std::size_t>;
  { G::kElementBytes } -> std::convertible_to<std::size_t>;

  { G::generator() } -> std::convertible_to<typename G::Element>;
  { G::identity() } -> std::convertible_to<typename G::Element>;
  { G::hash_to_group(bytes) } -> std::same_as<typename G::Element>;

  { s + s } -> std::same_as<typename G::Scalar>;
  { s - s } -> std::same_as<typename G::Scalar>;
  { s * s } -> std::same_as<typename G::Scalar>;
  { -s } -> std::same_as<typename G::Scalar>;
  { s == s } -> std::convertible_to<bool>;
  { G::Scalar::from_u64(small) } -> std::same_as<typename G::Scalar>;
  { G::Scalar::from_wide(bytes) } -> std::same_as<typename G::Scalar>;
  { G::Scalar::from_canonical(bytes) } -> std::same_as<std::optional<typename G::Scalar>>;
  { s.to_bytes() } -> std::same_as<Bytes>;
  { s.is_zero() } -> std::convertible_to<bool>;

  { e + e } -> std::same_as<typename G::Element>;
  { e - e } -> std::same_as<typename G::Element>;
  { s * e } -> std::same_as<typename G::Element>;
  { e == e } -> std::convertible_to<bool>;
  { e.to_bytes() } -> std::same_as<Bytes>;
  { G::Element::from_canonical(bytes) } -> std::same_as<std::optional<typename G::Element>>;
};

template <PrimeOrderGroup G>
using Scalar = typename G::Scalar;

template <PrimeOrderGroup G>
using Element = typename G::Element;

template <PrimeOrderGroup G>
void write_scalar(ByteWriter& w, const Scalar<G>& s) {
  w.raw(s.to_bytes());
}

template <PrimeOrderGroup G>
void write_element(ByteWriter& w, const Element<G>& e) {
  w.raw(e.to_bytes());
}

template <PrimeOrderGroup G>
Scalar<G> read_scalar(ByteReader& r) {
  auto s = Scalar<G>::from_canonical(r.raw(G::kScalarBytes));
  if (!s) throw EncodingError("non-canonical scalar encoding");
  return *s;
}

template <PrimeOrderGroup G>
Element<G> read_element(ByteReader& r) {
  auto e = Element<G>::from_canonical(r.raw(G::kElementBytes));
  if (!e) throw EncodingError("encoding is not a valid group element");
  return *e;
}

}  // namespace avecq::crypto
