// fastlink command-line front end: trains codecs, distills importance
// evaluators, runs SNR-sweep experiments, and summarizes result CSVs.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fastlink/codec.hpp"
#include "fastlink/harness.hpp"
#include "fastlink/importance.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

fastlink::harness::ExperimentConfig load_config(const std::string& path, bool seed_set,
                                                std::uint64_t seed) {
  auto cfg = fastlink::harness::parse_config(path);
  if (seed_set) cfg.master_seed = seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastlink: importance-aware feature allocation link simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string summary_path;
  std::string in_path;
  std::string dataset_out;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed, "override master_seed from the config")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* train = app.add_subcommand("train-codec", "train the codec and save the model");
  add_common(train, true);
  train->add_option("--out", out_path, "output model file")->required();

  CLI::App* distill = app.add_subcommand(
      "distill", "build gradient-label pairs and fit the importance evaluator");
  add_common(distill, true);
  distill->add_option("--out", out_path, "output evaluator file")->required();
  distill->add_option("--dataset-out", dataset_out, "also save the label pairs");

  CLI::App* run = app.add_subcommand("run", "run the configured experiment sweep");
  add_common(run, true);
  run->add_option("--out", out_path, "output results CSV")->required();
  run->add_option("--summary", summary_path, "also write a per-(scheme,mode,snr) summary CSV");

  CLI::App* summarize = app.add_subcommand("summarize", "aggregate a results CSV");
  summarize->add_option("--in", in_path, "results CSV from 'run'")->required();
  summarize->add_option("--out", out_path, "output summary CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  try {
    namespace hn = fastlink::harness;
    if (train->parsed()) {
      auto cfg = load_config(config_path, seed_set, seed);
      cfg.schemes = {hn::Scheme::Jscc};  // codec training needs no evaluator
      const auto art = hn::prepare(cfg);
      fastlink::codec::save_model(art.model, out_path);
      std::cout << "wrote codec model to " << out_path << "\n";
    } else if (distill->parsed()) {
      auto cfg = load_config(config_path, seed_set, seed);
      if (cfg.codec_model.empty())
        std::cout << "no codec_model in config; training one first\n";
      cfg.schemes = {hn::Scheme::Jscc};
      const auto art = hn::prepare(cfg);  // codec only
      const auto pairs = hn::build_distill_pairs(cfg, art.model);
      if (!dataset_out.empty()) fastlink::importance::save_distill_dataset(pairs, dataset_out);
      const auto evaluator = fastlink::importance::distill_train(pairs);
      fastlink::importance::save_evaluator(evaluator, out_path);
      std::cout << "wrote evaluator (" << pairs.size() << " pairs) to " << out_path << "\n";
    } else if (run->parsed()) {
      const auto cfg = load_config(config_path, seed_set, seed);
      const auto rows = hn::run_experiment(cfg);
      hn::emit_csv(rows, out_path);
      std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
      if (!summary_path.empty()) {
        // Aggregate the file just written (not the in-memory rows) so
        // `run --summary` and a later `summarize --in` agree exactly.
        hn::emit_summary(hn::parse_csv(out_path), summary_path);
        std::cout << "wrote summary to " << summary_path << "\n";
      }
    } else if (summarize->parsed()) {
      const auto rows = hn::parse_csv(in_path);
      hn::emit_summary(rows, out_path);
      std::cout << "wrote summary to " << out_path << "\n";
    }
  } catch (const fastlink::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fastlink::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
