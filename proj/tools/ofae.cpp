#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ofae/app.hpp"

namespace {

// Flags with the same names as config keys override the config.
const char* const kOverrideKeys[] = {"tree_kind",   "transform", "n_estimators", "max_depth", "max_samples",
                                     "max_features", "test_size", "n_train",      "n_test",    "standardize",
                                     "box_mode",    "seed",      "input",        "workers"};

struct Flags {
  ofae::app::Invocation inv;
  std::map<std::string, std::string> raw;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.inv.config, "JSON run configuration");
  cmd->add_option("--model", f.inv.model, "model file (RGB models use <stem>.R/.G/.B<ext>)");
  cmd->add_option("--codes", f.inv.codes, "codes CSV");
  cmd->add_option("--output", f.inv.output, "output file or directory");
  for (const char* key : kOverrideKeys) {
    cmd->add_option_function<std::string>(
        std::string("--") + key, [&f, key](const std::string& v) { f.raw[key] = v; }, "overrides config key");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblique forest autoencoder: encode samples as leaf ids, decode by linear programming"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* fit = app.add_subcommand("fit", "fit a model on the training split");
  CLI::App* encode = app.add_subcommand("encode", "write the leaf codes of every input sample");
  CLI::App* decode = app.add_subcommand("decode", "reconstruct samples from codes");
  CLI::App* roundtrip = app.add_subcommand("roundtrip", "encode, decode and score a test set");
  CLI::App* ablate = app.add_subcommand("ablate", "sweep one hyperparameter");
  for (CLI::App* cmd : {fit, encode, decode, roundtrip, ablate}) add_common(cmd, f);
  for (CLI::App* cmd : {roundtrip, ablate}) cmd->add_option("--metrics", f.inv.metrics, "comma list of mse, ssim");
  ablate->add_option("--param", f.inv.param, "n_estimators, max_depth, max_features, max_samples or n_train");
  ablate->add_option("--values", f.inv.values, "comma-separated values");
  ablate->add_option("--runs", f.inv.runs, "runs per value; run r uses seed + r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ofae::app::kConfig;
  }
  f.inv.overrides = f.raw;

  if (fit->parsed()) return ofae::app::cmd_fit(f.inv, std::cout, std::cerr);
  if (encode->parsed()) return ofae::app::cmd_encode(f.inv, std::cout, std::cerr);
  if (decode->parsed()) return ofae::app::cmd_decode(f.inv, std::cout, std::cerr);
  if (roundtrip->parsed()) return ofae::app::cmd_roundtrip(f.inv, std::cout, std::cerr);
  return ofae::app::cmd_ablate(f.inv, std::cout, std::cerr);
}
