// cited: ownership verification workbench.
//
//   cited <gen-data|train|attack|verify|bounds|pipeline> --config exp.json
//         [--out DIR] [--seed N]
//
// CITED_SEED in the environment overrides --seed.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cited/error.hpp"
#include "cited/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitInvariant = 4;

int exit_code_for(cited::ErrorCode code) {
  using cited::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigInvalid:
      return kExitConfig;
    case ErrorCode::MissingArtifact:
      return kExitMissing;
    case ErrorCode::InvariantViolation:
    case ErrorCode::HypothesisViolated:
      return kExitInvariant;
    default:
      return kExitFailure;
  }
}

std::uint64_t parse_seed(const std::string& text, const char* source) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text.front() == '-')
    cited::fail(cited::ErrorCode::ConfigInvalid,
                std::string(source) + ": not an unsigned 64-bit integer: '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-signature ownership verification for graph neural networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seed_text;

  const std::map<std::string, std::pair<std::string, std::function<void(const cited::ExperimentConfig&)>>>
      commands{
          {"gen-data", {"Generate or import the dataset", cited::cmd_gen_data}},
          {"train", {"Train the target, build and refreeze its signature", cited::cmd_train_target}},
          {"attack", {"Extract surrogates and train independents", cited::cmd_attack}},
          {"verify", {"Score the pool against the signature", cited::cmd_verify}},
          {"bounds", {"Check the perturbation bounds on the target", cited::cmd_bounds}},
          {"pipeline", {"Run every stage in order", cited::cmd_pipeline}},
      };

  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "Experiment JSON")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seed", seed_text, "Master seed (overrides master_seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    cited::ExperimentConfig cfg = cited::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!seed_text.empty()) cfg.master_seed = parse_seed(seed_text, "--seed");
    if (const char* env = std::getenv("CITED_SEED"); env != nullptr && *env != '\0')
      cfg.master_seed = parse_seed(env, "CITED_SEED");

    for (const auto& [name, entry] : commands) {
      if (app.got_subcommand(name)) {
        entry.second(cfg);
        std::cout << name << ": ok (" << cfg.output_dir.string() << ")\n";
        return kExitOk;
      }
    }
  } catch (const cited::Error& e) {
    std::cerr << "error [" << cited::to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
