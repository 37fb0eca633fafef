#pragma once

#include <utility>

#include "avecq/relations/statements.hpp"

namespace avecq::relations {

/// (mu_alpha, mu_beta) for an update: the Beta rule when the task has a final
/// answer, zero for a void task.
inline std::pair<std::uint64_t, std::uint64_t> quality_increment(std::optional<bool> correct) {
  if (!correct) return {0, 0};
  return *correct ? std::pair<std::uint64_t, std::uint64_t>{1, 0} : std::pair<std::uint64_t, std::uint64_t>{0, 1};
}

template <PrimeOrderGroup G>
bool reencrypts_to(const Element<G>& pk, const EncryptedValue<G>& ct, const crypto::Limbs& limbs,
                   const std::vector<Scalar<G>>& rand) {
  if (limbs.size() != ct.limbs.size() || rand.size() != ct.limbs.size()) return false;
  for (auto l : limbs)
    if (l >= crypto::LimbCodec<G>::kDomainSize) return false;
  return crypto::encrypt_limbs<G>(pk, limbs, rand) == ct;
}

namespace detail {
template <PrimeOrderGroup G>
std::optional<std::uint32_t> try_decrypt_answer(const Scalar<G>& sk, const EncryptedValue<G>& ct) {
  try {
    return crypto::decrypt<G>(sk, ct.limbs.at(0));
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

template <PrimeOrderGroup G>
std::optional<policy::FinalAnswer> try_decrypt_final(const Scalar<G>& sk, const EncryptedValue<G>& ct,
                                                     const policy::TaskPolicy& p) {
  try {
    auto words = crypto::limbs_to_words(crypto::decrypt_limbs<G>(sk, ct));
    return policy::FinalAnswer::from_words(words, p);
  } catch (const CodecError&) {
    return std::nullopt;
  }
}

template <PrimeOrderGroup G>
std::optional<bool> decrypted_correctness(const Scalar<G>& sk, const EncryptedValue<G>& final_ct,
                                          const EncryptedValue<G>& answer_ct, const policy::TaskPolicy& p) {
  auto fin = try_decrypt_final<G>(sk, final_ct, p);
  auto a = try_decrypt_answer<G>(sk, answer_ct);
  if (!fin || !a) return std::nullopt;
  return policy::is_correct(*a, *fin, p);
}
}  // namespace detail

/// Response validity: certified identity, well-formed ciphertexts, a fresh
/// quality above threshold, tag and Merkle membership of the stored leaf, and
/// correct rerandomization.
template <PrimeOrderGroup G>
bool check_prove_qual(const ProveQualStatement<G>& x, const ProveQualWitness<G>& w) {
  x.validate_shape();
  // EdDSAver
  if (!crypto::verify_sig<G>(x.pk_ra, w.m.to_bytes(), w.cert)) return false;
  // ValidEnc(answer)
  if (w.answer >= x.policy.choices) return false;
  if (!reencrypts_to<G>(x.pk_r, x.answer, {w.answer}, w.answer_rand)) return false;
  // TaskVer
  if (!policy::clears_threshold(w.quality, x.policy)) return false;
  // QualVer
  auto leaf = w.base + crypto::commit_pair<G>(0, 0, w.r_dummy);
  if (!crypto::open_check_pair<G>(leaf, w.quality.alpha, w.quality.beta, w.r_c)) return false;
  // HashComVer
  if (x.tag != quality_tag<G>(leaf, w.m)) return false;
  // ValidEnc(address)
  if (!reencrypts_to<G>(x.pk_r, x.address, crypto::u32_limbs(w.address), w.address_rand)) return false;
  // MTPathVer
  if (!merkle::verify_path(x.mt_root, quality_leaf<G>(leaf), w.path)) return false;
  // Rerandomization
  return x.rerandomized == leaf + crypto::commit_pair<G>(0, 0, w.r_star);
}

/// The encrypted final answer is AnsCalc over the decrypted responses.
template <PrimeOrderGroup G>
bool check_auth_calc(const AuthCalcStatement<G>& x, const RequesterKeyWitness<G>& w) {
  x.validate_shape();
  if (!crypto::valid_key_pair<G>(x.pk_r, w.sk_r)) return false;
  std::vector<std::uint32_t> answers;
  answers.reserve(x.answers.size());
  for (const auto& ct : x.answers) {
    auto a = detail::try_decrypt_answer<G>(w.sk_r, ct);
    if (!a || *a >= x.policy.choices) return false;
    answers.push_back(*a);
  }
  auto claimed = detail::try_decrypt_final<G>(w.sk_r, x.final_answer, x.policy);
  if (!claimed) return false;
  return *claimed == policy::ans_calc(answers, {}, x.policy);
}

/// The worker's answer counts as correct against the final answer.
template <PrimeOrderGroup G>
bool check_auth_value(const AuthValueStatement<G>& x, const RequesterKeyWitness<G>& w) {
  x.validate_shape();
  if (!crypto::valid_key_pair<G>(x.pk_r, w.sk_r)) return false;
  auto correct = detail::decrypted_correctness<G>(w.sk_r, x.final_answer, x.answer, x.policy);
  return correct.value_or(false);
}

/// new = old + Com(mu, r_R) componentwise, with mu fixed by the Beta rule.
template <PrimeOrderGroup G>
bool check_auth_qual(const AuthQualStatement<G>& x, const AuthQualWitness<G>& w) {
  x.validate_shape();
  if (!crypto::valid_key_pair<G>(x.pk_r, w.sk_r)) return false;
  std::optional<bool> correct;
  if (x.final_answer) {
    correct = detail::decrypted_correctness<G>(w.sk_r, *x.final_answer, x.answer, x.policy);
    if (!correct) return false;
  }
  auto [mu_a, mu_b] = quality_increment(correct);
  return x.new_pair == x.old_pair + crypto::commit_pair<G>(mu_a, mu_b, w.r_r);
}

template <PrimeOrderGroup G>
bool check(const ProveQualStatement<G>& x, const ProveQualWitness<G>& w) {
  return check_prove_qual(x, w);
}
template <PrimeOrderGroup G>
bool check(const AuthCalcStatement<G>& x, const RequesterKeyWitness<G>& w) {
  return check_auth_calc(x, w);
}
template <PrimeOrderGroup G>
bool check(const AuthValueStatement<G>& x, const RequesterKeyWitness<G>& w) {
  return check_auth_value(x, w);
}
template <PrimeOrderGroup G>
bool check(const AuthQualStatement<G>& x, const AuthQualWitness<G>& w) {
  return check_auth_qual(x, w);
}

}  // namespace avecq::relations
