// avecq: scenario runner, log auditor and fixture generator.
//
// Exit codes: 0 success, 1 invariant or audit failure, 2 bad input.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "avecq/crypto/golden.hpp"
#include "avecq/harness/runner.hpp"

namespace {

using namespace avecq;
using namespace avecq::harness;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string log;
  std::vector<std::string> attacks;
};

int cmd_run(const RunArgs& a) {
  Scenario sc;
  Fixture fx;
  try {
    sc = load_scenario(a.scenario);
    if (a.seed) sc.seed = *a.seed;
    for (const auto& name : a.attacks) sc.attacks.insert(attack_from_string(name));
    sc.validate();
    fx = ingest_fixture(sc.fixture_path(), sc.policy.choices);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadInput;
  } catch (const FixtureError& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return kBadInput;
  }

  RunOutput out;
  try {
    out = run_scenario<crypto::Ristretto255>(sc, fx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadInput;
  } catch (const FixtureError& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return kBadInput;
  }
  write_text(a.out, out.report_text());
  if (!a.log.empty()) write_text(a.log, out.log_text());
  for (const auto& name : out.failed) std::cerr << "invariant failed: " << name << '\n';
  return out.ok ? kOk : kFailed;
}

int cmd_verify(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read log " << path << '\n';
    return kBadInput;
  }
  auto res = verify_log(in);
  std::cout << res.to_json().dump(2) << '\n';
  return res.ok ? kOk : kFailed;
}

int cmd_gen_fixture(const std::string& shape, std::uint64_t seed, const std::string& out) {
  write_text(out, gen_fixture(shape, seed));
  return kOk;
}

int cmd_golden() {
  nlohmann::ordered_json j;
  j["ristretto255"] = crypto::golden_vectors<crypto::Ristretto255>();
  j["small"] = crypto::golden_vectors<crypto::SmallPrimeGroup>();
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AVeCQ anonymous crowdsourcing simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its metrics report");
  run_cmd->add_option("scenario", run.scenario, "Scenario file (.ini)")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run.out, "Report path (default: stdout)");
  run_cmd->add_option("--log", run.log, "Transaction log path (line-delimited JSON)");
  run_cmd->add_option("--attack", run.attacks,
                      "Enable an attack: duplicate-response, stale-quality, forged-proof, deprivation, void-task");

  std::string log_path;
  auto* verify_cmd = app.add_subcommand("verify-log", "Re-verify every proof and balance in a run log");
  verify_cmd->add_option("log", log_path, "Log written by `run --log`")->required();

  std::string shape, fixture_out;
  std::uint64_t fixture_seed = 1;
  auto* gen_cmd = app.add_subcommand("gen-fixture", "Emit a synthetic worker,answer CSV");
  gen_cmd->add_option("shape", shape, "ROWSxCHOICES, e.g. 39x2")->required();
  gen_cmd->add_option("--seed", fixture_seed, "Generator seed");
  gen_cmd->add_option("--out", fixture_out, "Output path (default: stdout)");

  auto* golden_cmd = app.add_subcommand("golden-vectors", "Print the pinned crypto test vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*verify_cmd) return cmd_verify(log_path);
    if (*gen_cmd) return cmd_gen_fixture(shape, fixture_seed, fixture_out);
    if (*golden_cmd) return cmd_golden();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kBadInput;
}
