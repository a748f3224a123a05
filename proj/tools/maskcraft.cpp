#include <CLI11.hpp>

#include <iostream>
#include <unistd.h>

#include "maskcraft/cli/commands.hpp"
#include "maskcraft/errors.hpp"
#include "maskcraft/training/trainer.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

std::filesystem::path self_exe(const char* argv0) {
  std::error_code ec;
  const auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::filesystem::absolute(argv0) : p;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace maskcraft;
  CLI::App app{"maskcraft: instance segmentation mask-head experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "maskcraft 0.1.0");

  cli::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic shapes dataset");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--count", synth.count, "number of images");
  synth_cmd->add_option("--size", synth.size, "image side in pixels")->check(CLI::Range(32, 4096));
  synth_cmd->add_option("--max-instances", synth.max_instances, "instances per image")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_flag("--force", synth.force, "overwrite a non-empty output directory");
  synth_cmd->add_flag("--json", synth.json, "machine-readable output");

  cli::TrainArgs train;
  std::string train_config;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", train_config, "config file (default: desk-scale defaults)");
  train_cmd->add_option("--dataset", train.dataset, "dataset directory")->required();
  train_cmd->add_option("--out", train.out, "run directory")->required();
  train_cmd->add_option("--steps", train.steps, "optimizer steps");
  train_cmd->add_option("--seed", train.seed, "run seed");
  train_cmd->add_flag("--force", train.force, "overwrite an existing checkpoint");
  train_cmd->add_flag("--resume", train.resume, "continue from the checkpoint in --out");
  train_cmd->add_flag("--json", train.json, "machine-readable output");

  cli::EvalArgs evaluate;
  std::string eval_config, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint (segm and bbox AP)");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--dataset", evaluate.dataset, "dataset directory")->required();
  eval_cmd->add_option("--config", eval_config, "refuse checkpoints trained with another architecture");
  eval_cmd->add_option("--out", eval_out, "write predictions.json and report.json here");
  eval_cmd->add_option("--limit", evaluate.limit, "evaluate only the first N images");
  eval_cmd->add_flag("--json", evaluate.json, "machine-readable output");

  cli::AblateArgs ablate;
  std::string only;
  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate a grid of variants and seeds");
  ablate_cmd->add_option("--spec", ablate.spec, "ablation spec file")->required();
  ablate_cmd->add_flag("--resume", ablate.resume, "skip runs already completed with the same config");
  ablate_cmd->add_option("--jobs", ablate.jobs, "parallel worker processes")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--only", only, "run a single variant/seed pair")->group("");
  ablate_cmd->add_flag("--json", ablate.json, "machine-readable output");

  cli::RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "write detection overlays");
  render_cmd->add_option("--checkpoint", render.checkpoint, "checkpoint file")->required();
  render_cmd->add_option("--dataset", render.dataset, "dataset directory")->required();
  render_cmd->add_option("--out", render.out, "output directory")->required();
  render_cmd->add_option("--limit", render.limit, "number of images");
  render_cmd->add_flag("--force", render.force, "write into a non-empty directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  const bool deterministic = training::deterministic_from_env();
  training::configure_determinism(deterministic);
  try {
    if (synth_cmd->parsed()) {
      cli::cmd_synth(synth, std::cout);
    } else if (train_cmd->parsed()) {
      if (!train_config.empty()) train.config = train_config;
      train.deterministic = deterministic;
      cli::cmd_train(train, std::cout);
    } else if (eval_cmd->parsed()) {
      if (!eval_config.empty()) evaluate.config = eval_config;
      if (!eval_out.empty()) evaluate.out = eval_out;
      cli::cmd_eval(evaluate, std::cout);
    } else if (ablate_cmd->parsed()) {
      if (!only.empty()) ablate.only = only;
      ablate.deterministic = deterministic;
      ablate.self_exe = self_exe(argv[0]);
      cli::cmd_ablate(ablate, std::cout);
    } else if (render_cmd->parsed()) {
      cli::cmd_render(render, std::cout);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
