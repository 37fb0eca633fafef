#pragma once

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "avecq/ledger/fees.hpp"
#include "avecq/policy/policy.hpp"

namespace avecq::harness {

enum class Attack : std::uint8_t { DuplicateResponse, StaleQuality, ForgedProof, Deprivation, VoidTask };

inline constexpr Attack kAllAttacks[] = {Attack::DuplicateResponse, Attack::StaleQuality, Attack::ForgedProof,
                                         Attack::Deprivation, Attack::VoidTask};

inline const char* to_string(Attack a) {
  switch (a) {
    case Attack::DuplicateResponse: return "duplicate-response";
    case Attack::StaleQuality: return "stale-quality";
    case Attack::ForgedProof: return "forged-proof";
    case Attack::Deprivation: return "deprivation";
    case Attack::VoidTask: return "void-task";
  }
  return "?";
}

inline Attack attack_from_string(const std::string& s) {
  for (auto a : kAllAttacks)
    if (s == to_string(a)) return a;
  throw ConfigError("unknown attack '" + s +
                    "' (expected duplicate-response, stale-quality, forged-proof, deprivation or void-task)");
}

struct Scenario {
  std::string name = "scenario";
  std::filesystem::path base_dir = ".";

  // [network]
  std::uint64_t seed = 1;
  ledger::FeeParams fees;
  ledger::GasSchedule gas;
  std::uint64_t block_seconds = 15;
  std::size_t tree_depth = 20;

  // [task]
  std::string description = "task";
  std::vector<std::string> labels;  // empty: "0".."c-1"
  std::uint32_t n_th = 1;
  Wei budget = 0;  // 0: roster size (plus attacker slack) times p_correct
  std::uint64_t response_window = 12;
  std::uint64_t processing_window = 12;
  std::uint64_t protest_window = 4;

  // [policy]
  policy::TaskPolicy policy;

  // [workers]
  std::uint32_t count = 0;
  std::filesystem::path fixture;
  std::uint32_t warmups = 2;
  Wei funding = kEther / 10;

  // [attacks]
  std::set<Attack> attacks;

  bool has(Attack a) const { return attacks.count(a) > 0; }

  void validate() const {
    policy.validate();
    if (count == 0) throw ConfigError("[workers] count must be positive");
    if (n_th == 0) throw ConfigError("[task] n_th must be positive");
    if (count < n_th && !has(Attack::VoidTask))
      throw ConfigError("[workers] count " + std::to_string(count) + " is below n_th " + std::to_string(n_th));
    if (!labels.empty() && labels.size() != policy.choices)
      throw ConfigError("[task] labels must list exactly `choices` entries");
    if (response_window == 0 || processing_window == 0 || protest_window == 0)
      throw ConfigError("[task] windows must be positive");
    if (has(Attack::StaleQuality) && warmups < 2)
      throw ConfigError("stale-quality needs at least two warm-up rounds");
    if (has(Attack::StaleQuality) && count < 2) throw ConfigError("stale-quality needs at least two workers");
    if (has(Attack::VoidTask) && n_th < 2) throw ConfigError("void-task needs n_th of at least 2");
    if (fixture.empty()) throw ConfigError("[workers] fixture is required");
    gas.validate();
  }

  std::filesystem::path fixture_path() const { return fixture.is_absolute() ? fixture : base_dir / fixture; }
};

namespace detail {
inline Wei gwei_to_wei(double gwei, const std::string& key) {
  if (!(gwei >= 0) || gwei > 1e9) throw ConfigError(key + " out of range");
  return static_cast<Wei>(std::llround(gwei * static_cast<double>(kGwei)));
}

template <class T>
T get(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  try {
    return pt.get<T>(key, fallback);
  } catch (const boost::property_tree::ptree_error&) {
    throw ConfigError("bad value for " + key);
  }
}

inline bool flag(const boost::property_tree::ptree& pt, const std::string& key) {
  auto v = boost::algorithm::to_lower_copy(pt.get<std::string>(key, "false"));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError("bad boolean for " + key);
}
}  // namespace detail

/// Reads the INI-style scenario file. Unknown attack keys are rejected;
/// anything else missing falls back to the defaults above.
inline Scenario load_scenario(const std::filesystem::path& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read scenario: " + std::string(e.what()));
  }
  using detail::get;
  Scenario s;
  s.name = path.stem().string();
  s.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();

  s.fees.latency = ledger::LatencyProfile::by_name(get<std::string>(pt, "network.profile", "goerli"));
  s.seed = get<std::uint64_t>(pt, "network.seed", 1);
  s.fees.base_fee = detail::gwei_to_wei(get<double>(pt, "network.base_fee_gwei", 5), "network.base_fee_gwei");
  s.fees.priority_fee =
      detail::gwei_to_wei(get<double>(pt, "network.priority_fee_gwei", 1), "network.priority_fee_gwei");
  s.fees.eth_usd = get<double>(pt, "network.eth_usd", 1554.89);
  s.block_seconds = get<std::uint64_t>(pt, "network.block_seconds", 15);
  s.tree_depth = get<std::size_t>(pt, "network.tree_depth", 20);
  s.gas.submit_quality = get<std::uint64_t>(pt, "network.gas_submit_quality", s.gas.submit_quality);
  s.gas.worker_payment = get<std::uint64_t>(pt, "network.gas_worker_payment", s.gas.worker_payment);
  s.gas.refund = get<std::uint64_t>(pt, "network.gas_refund", s.gas.refund);
  s.gas.confiscate = get<std::uint64_t>(pt, "network.gas_confiscate", s.gas.confiscate);

  s.description = get<std::string>(pt, "task.description", s.description);
  auto labels = get<std::string>(pt, "task.labels", "");
  if (!labels.empty()) {
    boost::algorithm::split(s.labels, labels, boost::is_any_of(","));
    for (auto& l : s.labels) boost::algorithm::trim(l);
  }
  s.n_th = get<std::uint32_t>(pt, "task.n_th", 1);
  s.budget = get<Wei>(pt, "task.budget_wei", 0);
  s.response_window = get<std::uint64_t>(pt, "task.response_window", s.response_window);
  s.processing_window = get<std::uint64_t>(pt, "task.processing_window", s.processing_window);
  s.protest_window = get<std::uint64_t>(pt, "task.protest_window", s.protest_window);

  try {
    s.policy.rule = policy::answer_rule_from_string(get<std::string>(pt, "policy.rule", "mf"));
    s.policy.threshold = policy::Fraction::parse(get<std::string>(pt, "policy.threshold", "0"));
  } catch (const PolicyError& e) {
    throw ConfigError(std::string("[policy] ") + e.what());
  }
  s.policy.gamma = get<std::uint32_t>(pt, "policy.gamma", 1);
  s.policy.choices = get<std::uint32_t>(pt, "policy.choices", 2);
  s.policy.tolerance = get<std::uint32_t>(pt, "policy.tolerance", 0);
  s.policy.p_correct = get<Wei>(pt, "policy.p_correct_wei", kEther / 100);
  s.policy.p_incorrect = get<Wei>(pt, "policy.p_incorrect_wei", kEther / 250);

  s.count = get<std::uint32_t>(pt, "workers.count", 0);
  s.fixture = get<std::string>(pt, "workers.fixture", "");
  s.warmups = get<std::uint32_t>(pt, "workers.warmups", s.warmups);
  s.funding = get<Wei>(pt, "workers.funding_wei", s.funding);

  if (auto at = pt.get_child_optional("attacks")) {
    for (const auto& [key, value] : *at) {
      auto a = attack_from_string(key);
      if (detail::flag(*at, key)) s.attacks.insert(a);
      (void)value;
    }
  }
  try {
    s.validate();
  } catch (const PolicyError& e) {
    throw ConfigError(std::string("[policy] ") + e.what());
  }
  return s;
}

}  // namespace avecq::harness
