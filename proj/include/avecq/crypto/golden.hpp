#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "avecq/crypto/drbg.hpp"
#include "avecq/crypto/elgamal.hpp"
#include "avecq/crypto/pedersen.hpp"
#include "avecq/crypto/schnorr.hpp"

namespace avecq::crypto {

inline constexpr std::uint32_t kGoldenVersion = 1;

/// Pins generators, codec version and sample commitments, ciphertexts and
/// signatures. Every input is derived from a fixed DRBG seed so the file can
/// be regenerated and diffed.
template <PrimeOrderGroup G>
nlohmann::ordered_json golden_vectors() {
  using json = nlohmann::ordered_json;
  Drbg rng(as_bytes("avecq/golden-vectors/v1"));
  const auto& gens = Generators<G>::standard();

  json out;
  out["version"] = kGoldenVersion;
  out["group"] = std::string(G::kName);
  out["encoding_version"] = kEncodingVersion;
  out["codec"] = {{"version", LimbCodec<G>::kVersion}, {"limb_bits", LimbCodec<G>::kLimbBits}};
  out["generators"] = {{"G", to_hex(gens.g.to_bytes())}, {"H", to_hex(gens.h.to_bytes())}};
  out["hash_empty"] = hash({}).hex();

  json commitments = json::array();
  for (int i = 0; i < 10; ++i) {
    std::uint64_t x = rng.below(1000);
    auto r = random_scalar<G>(rng);
    commitments.push_back({{"x", x},
                           {"r", to_hex(r.to_bytes())},
                           {"commitment", to_hex(commit<G>(Scalar<G>::from_u64(x), r).to_bytes())}});
  }
  out["commitments"] = std::move(commitments);

  json ciphertexts = json::array();
  for (int i = 0; i < 5; ++i) {
    auto kp = keygen<G>(rng);
    auto x = static_cast<std::uint32_t>(rng.below(LimbCodec<G>::kDomainSize));
    auto r = random_scalar<G>(rng);
    auto ct = encrypt<G>(kp.pk, x, r);
    ciphertexts.push_back({{"sk", to_hex(kp.sk.to_bytes())},
                           {"pk", to_hex(kp.pk.to_bytes())},
                           {"x", x},
                           {"r", to_hex(r.to_bytes())},
                           {"c1", to_hex(ct.c1.to_bytes())},
                           {"c2", to_hex(ct.c2.to_bytes())}});
  }
  out["ciphertexts"] = std::move(ciphertexts);

  json signatures = json::array();
  for (int i = 0; i < 5; ++i) {
    auto kp = keygen<G>(rng);
    auto msg = rng.bytes<24>();
    auto sig = sign<G>(kp.sk, msg);
    signatures.push_back({{"sk", to_hex(kp.sk.to_bytes())},
                          {"pk", to_hex(kp.pk.to_bytes())},
                          {"message", to_hex(msg)},
                          {"R", to_hex(sig.R.to_bytes())},
                          {"S", to_hex(sig.S.to_bytes())}});
  }
  out["signatures"] = std::move(signatures);
  return out;
}

}  // namespace avecq::crypto
