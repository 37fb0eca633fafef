#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <unordered_set>

#include "avecq/crypto/golden.hpp"
#include "avecq/crypto/ristretto255.hpp"
#include "avecq/crypto/small_group.hpp"

using namespace avecq;
using namespace avecq::crypto;

template <class G>
class GroupTest : public ::testing::Test {};

using Groups = ::testing::Types<Ristretto255, SmallPrimeGroup>;
TYPED_TEST_SUITE(GroupTest, Groups);

constexpr int kCases = 1000;

TYPED_TEST(GroupTest, CommitZeroIsIdentity) {
  using G = TypeParam;
  EXPECT_EQ(commit<G>(Scalar<G>::from_u64(0), Scalar<G>::from_u64(0)).point, G::identity());
}

TYPED_TEST(GroupTest, Homomorphism) {
  using G = TypeParam;
  Drbg rng(as_bytes("homomorphism"));
  for (int i = 0; i < kCases; ++i) {
    auto x1 = random_scalar<G>(rng), r1 = random_scalar<G>(rng);
    auto x2 = random_scalar<G>(rng), r2 = random_scalar<G>(rng);
    auto lhs = commit_add<G>(commit<G>(x1, r1), commit<G>(x2, r2));
    // independent recomputation straight from the generators
    const auto& gens = Generators<G>::standard();
    Element<G> rhs = (x1 + x2) * gens.g + (r1 + r2) * gens.h;
    ASSERT_EQ(lhs.point, rhs) << "case " << i;
    ASSERT_EQ(lhs, commit<G>(x1 + x2, r1 + r2));
  }
}

TYPED_TEST(GroupTest, CommitAddIncrementOpens) {
  using G = TypeParam;
  Drbg rng(as_bytes("increment"));
  auto r1 = random_scalar<G>(rng), r2 = random_scalar<G>(rng);
  auto one = Scalar<G>::from_u64(1), zero = Scalar<G>::from_u64(0);
  auto c = commit_add<G>(commit<G>(one, r1), commit<G>(zero, r2));
  EXPECT_TRUE(open_check<G>(c, one, r1 + r2));
  auto base = commit<G>(Scalar<G>::from_u64(9), r1);
  EXPECT_EQ(commit_add<G>(base, commit<G>(zero, zero)), base);
}

TYPED_TEST(GroupTest, RerandomizationPreservesOpening) {
  using G = TypeParam;
  Drbg rng(as_bytes("rerandomize"));
  for (int i = 0; i < kCases; ++i) {
    auto x = Scalar<G>::from_u64(rng.below(1 << 20));
    auto r = random_scalar<G>(rng), s = random_scalar<G>(rng);
    auto c = commit<G>(x, r);
    auto rr = commit_add<G>(c, commit<G>(Scalar<G>::from_u64(0), s));
    ASSERT_TRUE(open_check<G>(rr, x, r + s));
    if (!s.is_zero()) {
      ASSERT_NE(rr, c);
    }
  }
}

TYPED_TEST(GroupTest, HidingRandomness) {
  using G = TypeParam;
  Drbg rng(as_bytes("hiding"));
  auto x = Scalar<G>::from_u64(3);
  EXPECT_NE(commit<G>(x, random_scalar<G>(rng)), commit<G>(x, random_scalar<G>(rng)));
}

TYPED_TEST(GroupTest, OpenCheckUniqueOverSmallDomain) {
  using G = TypeParam;
  Drbg rng(as_bytes("open-check"));
  auto r = random_scalar<G>(rng);
  EXPECT_TRUE(open_check<G>(commit<G>(Scalar<G>::from_u64(5), r), Scalar<G>::from_u64(5), r));
  EXPECT_FALSE(open_check<G>(commit<G>(Scalar<G>::from_u64(5), r), Scalar<G>::from_u64(6), r));
  for (std::uint64_t x = 0; x <= 100; ++x) {
    auto c = commit<G>(Scalar<G>::from_u64(x), r);
    int accepted = 0;
    for (std::uint64_t y = 0; y <= 100; ++y) accepted += open_check<G>(c, Scalar<G>::from_u64(y), r);
    ASSERT_EQ(accepted, 1) << "x=" << x;
  }
}

TYPED_TEST(GroupTest, KeygenDeterministic) {
  using G = TypeParam;
  auto a = keygen<G>(as_bytes("seed-1"));
  auto b = keygen<G>(as_bytes("seed-1"));
  EXPECT_EQ(a.sk, b.sk);
  EXPECT_EQ(a.pk, b.pk);
  EXPECT_EQ(a.pk, a.sk * G::generator());
  EXPECT_TRUE(valid_key_pair<G>(a.pk, a.sk));
  EXPECT_THROW(keygen<G>(ByteView{}), DomainError);
}

TYPED_TEST(GroupTest, EncryptionRoundTrip) {
  using G = TypeParam;
  Drbg rng(as_bytes("elgamal"));
  auto kp = keygen<G>(rng);
  for (std::uint32_t a = 0; a < 64; ++a) {
    auto ct = encrypt<G>(kp.pk, a, random_scalar<G>(rng));
    ASSERT_EQ(decrypt<G>(kp.sk, ct), a);
  }
  for (int i = 0; i < kCases; ++i) {
    auto x = static_cast<std::uint32_t>(rng.below(LimbCodec<G>::kDomainSize));
    ASSERT_EQ(decrypt<G>(kp.sk, encrypt<G>(kp.pk, x, random_scalar<G>(rng))), x);
  }
  EXPECT_NE(encrypt<G>(kp.pk, 7, random_scalar<G>(rng)), encrypt<G>(kp.pk, 7, random_scalar<G>(rng)));
  EXPECT_THROW(encrypt<G>(kp.pk, LimbCodec<G>::kDomainSize, random_scalar<G>(rng)), DomainError);
}

TYPED_TEST(GroupTest, WrongKeySweep) {
  using G = TypeParam;
  Drbg rng(as_bytes("wrong-key"));
  auto kp = keygen<G>(rng);
  const std::uint32_t a = 42;
  auto ct = encrypt<G>(kp.pk, a, random_scalar<G>(rng));
  for (int i = 0; i < 100; ++i) {
    auto wrong = keygen<G>(rng);
    try {
      EXPECT_NE(decrypt<G>(wrong.sk, ct), a);
    } catch (const CodecError&) {
    }
  }
}

TYPED_TEST(GroupTest, MultiLimbRoundTrip) {
  using G = TypeParam;
  Drbg rng(as_bytes("limbs"));
  auto kp = keygen<G>(rng);
  auto blind = rng.bytes<16>();
  auto limbs = bytes_to_limbs(blind);
  ASSERT_EQ(limbs.size(), 8u);
  auto rand = random_scalars<G>(rng, limbs.size());
  auto ct = encrypt_limbs<G>(kp.pk, limbs, rand);
  EXPECT_EQ(limbs_to_bytes<16>(decrypt_limbs<G>(kp.sk, ct)), blind);
  EXPECT_EQ(limbs_to_u32(u32_limbs(0xdeadbeef)), 0xdeadbeefu);
  std::vector<std::uint32_t> words{1, 70000, 0xffffffff};
  EXPECT_EQ(limbs_to_words(words_to_limbs(words)), words);
}

TYPED_TEST(GroupTest, SignatureCompleteness) {
  using G = TypeParam;
  Drbg rng(as_bytes("schnorr"));
  for (int i = 0; i < kCases; ++i) {
    auto kp = keygen<G>(rng);
    auto m = rng.bytes<32>();
    auto sig = sign<G>(kp.sk, m);
    ASSERT_TRUE(verify_sig<G>(kp.pk, m, sig));
    auto bad = m;
    bad[rng.below(bad.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
    ASSERT_FALSE(verify_sig<G>(kp.pk, bad, sig));
  }
}

TYPED_TEST(GroupTest, SignaturePerturbationFails) {
  using G = TypeParam;
  Drbg rng(as_bytes("perturb"));
  auto one = Scalar<G>::from_u64(1);
  for (int i = 0; i < kCases; ++i) {
    auto kp = keygen<G>(rng);
    auto m = rng.bytes<16>();
    auto sig = sign<G>(kp.sk, m);
    ASSERT_FALSE(verify_sig<G>(kp.pk, m, Signature<G>{sig.R, sig.S + one}));
    ASSERT_FALSE(verify_sig<G>(kp.pk, m, Signature<G>{sig.R + G::generator(), sig.S}));
    // single-bit flips of the wire encoding
    auto wire = sig.to_bytes();
    wire[rng.below(wire.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
    try {
      ByteReader r(wire);
      auto flipped = Signature<G>::read(r);
      ASSERT_FALSE(verify_sig<G>(kp.pk, m, flipped));
    } catch (const EncodingError&) {
    }
  }
}

TYPED_TEST(GroupTest, CodecBijectiveOnSample) {
  using G = TypeParam;
  const auto& codec = LimbCodec<G>::instance();
  Drbg rng(as_bytes("codec"));
  for (int i = 0; i < kCases; ++i) {
    auto x = static_cast<std::uint32_t>(rng.below(LimbCodec<G>::kDomainSize));
    ASSERT_EQ(codec.inverse(LimbCodec<G>::forward(x)), x);
  }
  EXPECT_EQ(codec.inverse(LimbCodec<G>::forward(LimbCodec<G>::kDomainSize - 1)), LimbCodec<G>::kDomainSize - 1);
  EXPECT_FALSE(codec.inverse(Scalar<G>::from_u64(LimbCodec<G>::kDomainSize) * G::generator()).has_value());
}

TYPED_TEST(GroupTest, CanonicalEncodings) {
  using G = TypeParam;
  Drbg rng(as_bytes("encodings"));
  for (int i = 0; i < 100; ++i) {
    auto s = random_scalar<G>(rng);
    auto e = s * G::generator();
    EXPECT_EQ(Scalar<G>::from_canonical(s.to_bytes()), s);
    EXPECT_EQ(Element<G>::from_canonical(e.to_bytes()), e);
  }
  Bytes all_ff(G::kScalarBytes, 0xff);
  EXPECT_FALSE(Scalar<G>::from_canonical(all_ff).has_value());
  EXPECT_FALSE(Scalar<G>::from_canonical(Bytes(G::kScalarBytes + 1, 0)).has_value());
}

TEST(SmallGroup, CodecBijectiveExhaustive) {
  using G = SmallPrimeGroup;
  const auto& codec = LimbCodec<G>::instance();
  Element<G> acc = G::identity();
  for (std::uint32_t x = 0; x < LimbCodec<G>::kDomainSize; ++x) {
    ASSERT_EQ(codec.inverse(acc), x);
    acc = acc + G::generator();
  }
}

TEST(SmallGroup, NonResidueRejected) {
  // -1 is not a quadratic residue since q = 3 mod 4.
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(SmallPrimeGroup::kModulus - 1));
  EXPECT_FALSE(SmallPrimeGroup::Element::from_canonical(w.bytes()).has_value());
  Bytes four{4, 0, 0, 0};
  EXPECT_TRUE(SmallPrimeGroup::Element::from_canonical(four).has_value());
}

TEST(Keygen, DistinctSeedsGiveDistinctKeys) {
  std::set<Bytes> seen;
  for (std::uint32_t i = 0; i < 10000; ++i) {
    ByteWriter w;
    w.str("seed").u32(i);
    ASSERT_TRUE(seen.insert(keygen<Ristretto255>(w.bytes()).sk.to_bytes()).second) << i;
  }
}

TEST(Hash, EmptyInputIsPinned) {
  EXPECT_EQ(hash({}).hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(hash(as_bytes("abc")), hash(as_bytes("abc")));
}

TEST(Hash, BirthdayScan) {
  Drbg rng(as_bytes("birthday"));
  std::set<Digest> seen;
  for (int i = 0; i < 100000; ++i) {
    auto input = rng.bytes<24>();
    ASSERT_TRUE(seen.insert(hash(input)).second) << i;
  }
}

TEST(Drbg, ForksAreIndependentAndDeterministic) {
  Drbg a(7), b(7);
  EXPECT_EQ(a(), b());
  auto fa = a.fork("x"), fb = b.fork("x");
  EXPECT_EQ(fa(), fb());
  EXPECT_NE(a.fork("x", 1)(), a.fork("x", 2)());
  EXPECT_THROW(a.below(0), DomainError);
}

TEST(GoldenVectors, MatchPinnedFile) {
  std::ifstream in(std::string(AVECQ_TEST_DATA_DIR) + "/golden_vectors.json");
  ASSERT_TRUE(in) << "golden vector file missing";
  auto pinned = nlohmann::ordered_json::parse(in);
  EXPECT_EQ(pinned.at("ristretto255"), golden_vectors<Ristretto255>());
  EXPECT_EQ(pinned.at("small"), golden_vectors<SmallPrimeGroup>());
}

TEST(GoldenVectors, CommitmentsReopen) {
  auto gv = golden_vectors<Ristretto255>();
  ASSERT_EQ(gv["commitments"].size(), 10u);
  ASSERT_EQ(gv["ciphertexts"].size(), 5u);
  ASSERT_EQ(gv["signatures"].size(), 5u);
  for (const auto& c : gv["commitments"]) {
    auto r = *Scalar<Ristretto255>::from_canonical(from_hex(c["r"].get<std::string>()));
    auto com = *Element<Ristretto255>::from_canonical(from_hex(c["commitment"].get<std::string>()));
    EXPECT_TRUE(open_check<Ristretto255>({com}, Scalar<Ristretto255>::from_u64(c["x"].get<std::uint64_t>()), r));
  }
}
