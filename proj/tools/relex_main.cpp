#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relex/commands.hpp"
#include "relex/config.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs

  relex::RunConfig build() const {
    relex::RunConfig cfg = config_path.empty() ? relex::RunConfig()
                                               : relex::RunConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("override must look like key=value: " + kv);
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

// binds --flag to a config key, applied in command-line order
void bind(CLI::App* cmd, CliState& state, const std::string& flag, const std::string& key,
          const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&state, key](const std::string& v) { state.overrides.push_back(key + "=" + v); },
      help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relation extraction toolkit (LSTM encoder, convolutional features, "
               "dependency-weighted multi-factor attention)"};
  app.require_subcommand(1);

  CliState state;
  app.add_option("--config", state.config_path, "key = value configuration file");
  bind(&app, state, "--seed", "seed", "RNG seed");
  bind(&app, state, "--threshold", "threshold", "confidence threshold override");
  bind(&app, state, "--workers", "workers", "parallel evaluation workers");

  int (*handler)(const relex::RunConfig&) = nullptr;
  app.fallthrough();  // global flags remain valid after the subcommand name

  CLI::App* train = app.add_subcommand("train", "train a model and keep the best-dev checkpoint");
  bind(train, state, "--train", "train_path", "training JSONL");
  bind(train, state, "--dev", "dev_path", "validation JSONL");
  bind(train, state, "--embeddings", "embeddings_path", "word2vec text embeddings");
  bind(train, state, "--checkpoint", "checkpoint_path", "output checkpoint");
  bind(train, state, "--history", "history_path", "training history CSV");
  bind(train, state, "--m", "m", "attention factor count");
  bind(train, state, "--ws", "ws", "dependency distance window");
  bind(train, state, "--attention-variant", "attention_variant",
       "none | standard | dep_weighted | softmax_norm");
  bind(train, state, "--combine-mode", "combine_mode", "concat | max_pool");
  bind(train, state, "--max-epochs", "max_epochs", "epoch cap");
  bind(train, state, "--patience", "patience", "early stopping patience");
  train->callback([&]() { handler = relex::cmd_train; });

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a test set");
  bind(eval, state, "--checkpoint", "checkpoint_path", "checkpoint to evaluate");
  bind(eval, state, "--test", "test_path", "test JSONL");
  bind(eval, state, "--out-dir", "out_dir", "report directory");
  eval->callback([&]() { handler = relex::cmd_eval; });

  CLI::App* predict = app.add_subcommand("predict", "label a JSONL stream");
  bind(predict, state, "--checkpoint", "checkpoint_path", "checkpoint to use");
  bind(predict, state, "--input", "input_path", "input JSONL (relation optional)");
  bind(predict, state, "--output", "output_path", "output JSONL (stdout when omitted)");
  bind(predict, state, "--lenient", "lenient", "report per-line errors instead of aborting");
  predict->callback([&]() { handler = relex::cmd_predict; });

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of the full loss, all variants");
  bind(gradcheck, state, "--eps", "gradcheck_eps", "central difference step");
  bind(gradcheck, state, "--tol", "gradcheck_tol", "maximum relative error");
  bind(gradcheck, state, "--samples", "gradcheck_samples", "coordinates per parameter");
  gradcheck->callback([&]() { handler = relex::cmd_gradcheck; });

  CLI::App* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
  bind(synth, state, "--size", "size", "instance count");
  bind(synth, state, "--out", "out_path", "output JSONL");
  bind(synth, state, "--dev-size", "dev_size", "extra dev instances from the same stream");
  bind(synth, state, "--dev-out", "dev_out", "dev output JSONL");
  bind(synth, state, "--test-size", "test_size", "extra test instances from the same stream");
  bind(synth, state, "--test-out", "test_out", "test output JSONL");
  synth->callback([&]() { handler = relex::cmd_synth; });

  CLI11_PARSE(app, argc, argv);

  try {
    return handler(state.build());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return relex::kExitUsage;
  }
}
