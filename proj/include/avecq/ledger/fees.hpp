#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "avecq/common/errors.hpp"
#include "avecq/common/units.hpp"
#include "avecq/crypto/drbg.hpp"

namespace avecq::ledger {

enum class Method : std::uint8_t {
  Deploy = 1,
  CreateTask = 2,
  SubmitResponse = 3,
  SubmitAuthCalc = 4,
  SubmitQuality = 5,
  WorkerPayment = 6,
  Refund = 7,
  Confiscate = 8,
};

inline constexpr Method kAllMethods[] = {Method::Deploy,        Method::CreateTask,    Method::SubmitResponse,
                                         Method::SubmitAuthCalc, Method::SubmitQuality, Method::WorkerPayment,
                                         Method::Refund,        Method::Confiscate};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Deploy: return "Deploy";
    case Method::CreateTask: return "CreateTask";
    case Method::SubmitResponse: return "SubmitResponse";
    case Method::SubmitAuthCalc: return "SubmitAuthCalc";
    case Method::SubmitQuality: return "SubmitQuality";
    case Method::WorkerPayment: return "WorkerPayment";
    case Method::Refund: return "Refund";
    case Method::Confiscate: return "Confiscate";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  for (auto m : kAllMethods)
    if (s == to_string(m)) return m;
  throw LedgerError("unknown method '" + s + "'");
}

/// Gas used per contract method. SubmitQuality, WorkerPayment, Refund and
/// Confiscate are placeholders with no measured figure behind them.
struct GasSchedule {
  std::uint64_t deploy = 1'340'000;
  std::uint64_t create_task = 363'491;
  std::uint64_t submit_response = 394'604;
  std::uint64_t submit_auth_calc = 120'772;
  std::uint64_t submit_quality = 250'000;
  std::uint64_t worker_payment = 60'000;
  std::uint64_t refund = 60'000;
  std::uint64_t confiscate = 60'000;

  std::uint64_t gas(Method m) const {
    switch (m) {
      case Method::Deploy: return deploy;
      case Method::CreateTask: return create_task;
      case Method::SubmitResponse: return submit_response;
      case Method::SubmitAuthCalc: return submit_auth_calc;
      case Method::SubmitQuality: return submit_quality;
      case Method::WorkerPayment: return worker_payment;
      case Method::Refund: return refund;
      case Method::Confiscate: return confiscate;
    }
    throw LedgerError("unknown method");
  }

  void validate() const {
    for (auto m : kAllMethods)
      if (gas(m) == 0) throw ConfigError(std::string("gas for ") + to_string(m) + " must be positive");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (auto m : kAllMethods) j[to_string(m)] = gas(m);
    return j;
  }
  static GasSchedule from_json(const nlohmann::ordered_json& j) {
    GasSchedule g;
    g.deploy = j.at("Deploy");
    g.create_task = j.at("CreateTask");
    g.submit_response = j.at("SubmitResponse");
    g.submit_auth_calc = j.at("SubmitAuthCalc");
    g.submit_quality = j.at("SubmitQuality");
    g.worker_payment = j.at("WorkerPayment");
    g.refund = j.at("Refund");
    g.confiscate = j.at("Confiscate");
    return g;
  }
};

struct LatencyAnchor {
  double priority_gwei;
  double mean_blocks;
  double deviation;
};

/// Priority fee -> inclusion latency. Each anchor holds the observed mean and
/// deviation in blocks; between anchors both are interpolated linearly.
struct LatencyProfile {
  std::string name;
  std::vector<LatencyAnchor> anchors;  // ascending priority

  static LatencyProfile rinkeby() {
    return {"rinkeby",
            {{0.5, 8.68, 2.0}, {1.0, 2.9, 0.8}, {1.1, 2.54, 0.7}, {1.5, 2.3, 0.7},
             {2.0, 2.2, 0.7}, {5.0, 2.0, 0.7}, {10.0, 1.85, 0.7}}};
  }
  static LatencyProfile goerli() {
    return {"goerli",
            {{0.5, 9.5, 2.2}, {1.0, 3.8, 0.8}, {1.1, 3.52, 0.8}, {1.5, 3.3, 0.8},
             {2.0, 3.2, 0.8}, {5.0, 3.0, 0.8}, {10.0, 2.82, 0.8}}};
  }
  static LatencyProfile by_name(const std::string& name) {
    if (name == "rinkeby") return rinkeby();
    if (name == "goerli") return goerli();
    throw ConfigError("unknown network profile '" + name + "' (expected rinkeby or goerli)");
  }

  /// (mean, deviation) at priority fee delta. Below the lowest anchor the two
  /// lowest anchors are extrapolated; above the highest the last one is used.
  std::pair<double, double> at(double delta) const {
    if (anchors.size() < 2) throw ConfigError("latency profile needs at least two anchors");
    const auto& a0 = anchors[0];
    const auto& a1 = anchors[1];
    if (delta <= a0.priority_gwei) {
      double t = (delta - a0.priority_gwei) / (a1.priority_gwei - a0.priority_gwei);
      double mean = a0.mean_blocks + t * (a1.mean_blocks - a0.mean_blocks);
      double dev = a0.deviation + t * (a1.deviation - a0.deviation);
      return {mean, std::max(dev, a0.deviation)};
    }
    if (delta >= anchors.back().priority_gwei) return {anchors.back().mean_blocks, anchors.back().deviation};
    auto hi = std::upper_bound(anchors.begin(), anchors.end(), delta,
                               [](double d, const LatencyAnchor& a) { return d < a.priority_gwei; });
    auto lo = hi - 1;
    double t = (delta - lo->priority_gwei) / (hi->priority_gwei - lo->priority_gwei);
    return {lo->mean_blocks + t * (hi->mean_blocks - lo->mean_blocks),
            lo->deviation + t * (hi->deviation - lo->deviation)};
  }

  /// Whole blocks until inclusion: a normal draw centred half a block below
  /// the observed mean, truncated at zero and rounded up, never below one.
  std::uint64_t sample(double delta, crypto::Drbg& rng) const {
    auto [mean, dev] = at(delta);
    std::normal_distribution<double> dist(mean - 0.5, dev);
    double x;
    do {
      x = dist(rng);
    } while (x <= 0.0);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(x)));
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& x : anchors) a.push_back({x.priority_gwei, x.mean_blocks, x.deviation});
    return {{"name", name}, {"anchors", a}};
  }
};

struct FeeParams {
  Wei base_fee = 5 * kGwei;
  Wei priority_fee = 1 * kGwei;
  double eth_usd = 1554.89;
  LatencyProfile latency = LatencyProfile::rinkeby();

  nlohmann::ordered_json to_json() const {
    return {{"base_fee_wei", base_fee},
            {"priority_fee_wei", priority_fee},
            {"eth_usd", eth_usd},
            {"latency", latency.to_json()}};
  }
};

inline double to_gwei(Wei w) { return static_cast<double>(w) / static_cast<double>(kGwei); }

inline Wei checked_mul(Wei a, Wei b) {
  Wei r;
  if (__builtin_mul_overflow(a, b, &r)) throw LedgerError("wei overflow");
  return r;
}
inline Wei checked_add(Wei a, Wei b) {
  Wei r;
  if (__builtin_add_overflow(a, b, &r)) throw LedgerError("wei overflow");
  return r;
}

/// gas * (b + delta), in wei.
inline Wei fee_wei(std::uint64_t gas, Wei base_fee, Wei priority_fee) {
  return checked_mul(gas, checked_add(base_fee, priority_fee));
}

/// gas * (b + delta) * 1e-9 * eth_usd with b and delta in Gwei.
inline double cost_usd(std::uint64_t gas, const FeeParams& fees, Wei priority_fee) {
  return static_cast<double>(gas) * (to_gwei(fees.base_fee) + to_gwei(priority_fee)) * 1e-9 * fees.eth_usd;
}
inline double cost_usd(std::uint64_t gas, const FeeParams& fees) { return cost_usd(gas, fees, fees.priority_fee); }

}  // namespace avecq::ledger
