#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "negexlm/text_io.hpp"
#include "negexlm_cli/commands.hpp"

namespace negexlm::cli {

int run_cli(int argc, char** argv) {
  CLI::App app{"negexlm: LSTM language models trained with explicit negative examples"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");
  app.add_option("--seed", seed, "train a single seed (overrides seeds)");
  app.add_option("--threads", threads, "scoring threads")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "extra key=value assignment, repeatable");

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"gen-corpus", "generate train/dev/test corpora and vocabulary"},
      {"gen-suite", "write the minimal-pair evaluation suite"},
      {"train", "train one model per seed"},
      {"eval", "score checkpoints on the suite; mean and sd over seeds"},
      {"sweep-margin", "train and evaluate both margin losses over sweep.deltas"},
      {"augment-orc", "train on object-RC augmented corpora"},
      {"ablate", "train with token- or construction-level negatives removed"},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed) config.seeds = {*seed};
    if (threads) config.threads = *threads;
    config.validate();
    std::cout << "# config-hash: " << config.hash() << "\n" << config.resolved() << std::flush;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "gen-corpus") {
      cmd_gen_corpus(config);
    } else if (cmd == "gen-suite") {
      cmd_gen_suite(config);
    } else if (cmd == "train") {
      cmd_train(config);
    } else if (cmd == "eval") {
      const auto r = cmd_eval(config);
      std::cout << aggregate_markdown(r.aggregate, loss::loss_kind_name(config.loss.kind));
    } else if (cmd == "sweep-margin") {
      cmd_sweep_margin(config);
      std::cout << read_file(config.out_dir / "sweep.csv");
    } else if (cmd == "augment-orc") {
      cmd_augment_orc(config);
      std::cout << read_file(config.out_dir / "augment.csv");
    } else if (cmd == "ablate") {
      const auto r = cmd_ablate(config);
      std::cout << aggregate_markdown(r.aggregate, "ablated " + config.ablate_mode);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace negexlm::cli
