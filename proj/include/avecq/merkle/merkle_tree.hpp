#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <vector>

#include "avecq/crypto/hash.hpp"

namespace avecq::merkle {

using crypto::Digest;

inline Digest leaf_digest(ByteView payload) {
  const std::uint8_t prefix = 0x00;
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, &prefix, 1);
  crypto_hash_sha256_update(&st, payload.data(), payload.size());
  Digest d;
  crypto_hash_sha256_final(&st, d.bytes.data());
  return d;
}

inline Digest node_digest(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 1 + 2 * Digest::kSize> buf{};
  buf[0] = 0x01;
  std::copy(left.bytes.begin(), left.bytes.end(), buf.begin() + 1);
  std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 1 + Digest::kSize);
  return crypto::hash(buf);
}

inline constexpr std::size_t kMaxDepth = 32;

/// Padding digest for an empty subtree of the given height.
inline const Digest& empty_digest(std::size_t level) {
  static const auto table = [] {
    std::array<Digest, kMaxDepth + 1> t{};
    t[0] = crypto::hash_tagged("avecq/merkle/empty/v1", {});
    for (std::size_t l = 1; l <= kMaxDepth; ++l) t[l] = node_digest(t[l - 1], t[l - 1]);
    return t;
  }();
  if (level > kMaxDepth) throw OutOfRangeError("merkle level exceeds maximum depth");
  return table[level];
}

enum class Side : std::uint8_t { Left = 0, Right = 1 };

struct PathNode {
  Digest sibling;
  Side side;  // where the sibling sits relative to the running hash
  friend bool operator==(const PathNode&, const PathNode&) = default;
};

struct MerklePath {
  std::uint64_t position = 0;
  std::vector<PathNode> siblings;  // leaf level first

  friend bool operator==(const MerklePath&, const MerklePath&) = default;

  void write(ByteWriter& w) const {
    w.u64(position).u8(static_cast<std::uint8_t>(siblings.size()));
    for (const auto& n : siblings) w.raw(n.sibling.bytes).u8(static_cast<std::uint8_t>(n.side));
  }
  static MerklePath read(ByteReader& r) {
    MerklePath p;
    p.position = r.u64();
    auto n = r.u8();
    for (unsigned i = 0; i < n; ++i) {
      auto d = Digest::read(r);
      auto side = r.u8();
      if (side > 1) throw EncodingError("invalid merkle side flag");
      p.siblings.push_back({d, static_cast<Side>(side)});
    }
    return p;
  }
};

/// Folds the leaf up through the siblings. Side flags must agree with the
/// position bits, so a path cannot be replayed at another index.
inline bool verify_path(const Digest& root, const Digest& leaf, const MerklePath& path) {
  if (path.siblings.size() > kMaxDepth) return false;
  if (path.siblings.size() < 64 && (path.position >> path.siblings.size()) != 0) return false;
  Digest acc = leaf;
  for (std::size_t l = 0; l < path.siblings.size(); ++l) {
    const auto& node = path.siblings[l];
    bool we_are_right = ((path.position >> l) & 1) != 0;
    if (we_are_right != (node.side == Side::Left)) return false;
    acc = we_are_right ? node_digest(node.sibling, acc) : node_digest(acc, node.sibling);
  }
  return acc == root;
}

/// Append-only Merkle accumulator of fixed depth. Only the populated prefix
/// of each level is stored; everything to its right is implicit padding.
class MerkleTree {
 public:
  static constexpr std::size_t kDefaultDepth = 20;

  explicit MerkleTree(std::size_t depth = kDefaultDepth) : depth_(depth), levels_(depth + 1) {
    if (depth == 0 || depth > kMaxDepth) throw OutOfRangeError("merkle depth must be in [1, 32]");
  }

  std::size_t depth() const { return depth_; }
  std::uint64_t capacity() const { return std::uint64_t{1} << depth_; }
  std::uint64_t size() const { return levels_[0].size(); }
  const std::vector<Digest>& leaves() const { return levels_[0]; }

  std::uint64_t append(const Digest& leaf) {
    if (size() >= capacity()) throw CapacityError("merkle tree is full");
    std::uint64_t pos = size();
    levels_[0].push_back(leaf);
    std::uint64_t idx = pos;
    for (std::size_t l = 0; l < depth_; ++l) {
      std::uint64_t parent = idx >> 1;
      Digest left = node_at(l, parent << 1);
      Digest right = node_at(l, (parent << 1) | 1);
      auto& up = levels_[l + 1];
      if (up.size() <= parent) up.resize(parent + 1);
      up[parent] = node_digest(left, right);
      idx = parent;
    }
    return pos;
  }

  Digest root() const { return levels_[depth_].empty() ? empty_digest(depth_) : levels_[depth_][0]; }

  const Digest& leaf(std::uint64_t position) const {
    if (position >= size()) throw OutOfRangeError("merkle leaf position out of range");
    return levels_[0][position];
  }

  MerklePath prove_membership(std::uint64_t position) const {
    if (position >= size()) throw OutOfRangeError("merkle leaf position out of range");
    MerklePath path;
    path.position = position;
    std::uint64_t idx = position;
    for (std::size_t l = 0; l < depth_; ++l) {
      bool right = (idx & 1) != 0;
      path.siblings.push_back({node_at(l, idx ^ 1), right ? Side::Left : Side::Right});
      idx >>= 1;
    }
    return path;
  }

  nlohmann::ordered_json to_snapshot() const {
    nlohmann::ordered_json leaves = nlohmann::ordered_json::array();
    for (const auto& d : levels_[0]) leaves.push_back(d.hex());
    return {{"depth", depth_}, {"leaves", std::move(leaves)}};
  }

  static MerkleTree from_snapshot(const nlohmann::ordered_json& snap) {
    MerkleTree t(snap.at("depth").get<std::size_t>());
    for (const auto& h : snap.at("leaves")) t.append(Digest::from_hex(h.get<std::string>()));
    return t;
  }

 private:
  Digest node_at(std::size_t level, std::uint64_t idx) const {
    const auto& lv = levels_[level];
    return idx < lv.size() ? lv[idx] : empty_digest(level);
  }

  std::size_t depth_;
  std::vector<std::vector<Digest>> levels_;
};

}  // namespace avecq::merkle
