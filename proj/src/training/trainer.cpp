#include "maskcraft/training/trainer.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "maskcraft/errors.hpp"
#include "maskcraft/scaffold/sampler.hpp"
#include "maskcraft/training/alpha_schedule.hpp"
#include "maskcraft/training/checkpoint.hpp"

namespace maskcraft::training {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

json to_json(const StepRecord& r) {
  json aux = json::object();
  for (const auto& [scale, v] : r.losses.aux_losses) aux[std::to_string(scale)] = v;
  return {{"step", r.step},          {"l_cls", r.losses.l_cls}, {"l_box", r.losses.l_box},
          {"l_mask", r.losses.l_mask}, {"aux", aux},             {"alpha", r.losses.alpha},
          {"total", r.losses.total},  {"lr", r.learning_rate},  {"wall_time", r.wall_time}};
}

bool deterministic_from_env() {
  const char* v = std::getenv("MASKPLUS_DETERMINISTIC");
  return v != nullptr && std::string(v) == "1";
}

void configure_determinism(bool deterministic) {
  if (!deterministic) return;
  torch::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(true, false);
}

double learning_rate_at(const TrainConfig& train, std::int64_t step) {
  double lr = train.learning_rate;
  for (int s : train.lr_decay_steps) {
    if (step >= s) lr *= train.lr_decay_gamma;
  }
  return lr;
}

std::size_t sample_index(std::uint64_t seed, std::int64_t step, std::size_t dataset_size) {
  const auto n = static_cast<std::int64_t>(dataset_size);
  const std::int64_t epoch = step / n;
  std::vector<int> order(dataset_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix(mix(seed, 0x6f72646572ULL), static_cast<std::uint64_t>(epoch)));
  order = scaffold::random_subset(std::move(order), dataset_size, rng);
  return static_cast<std::size_t>(order[step % n]);
}

Rng step_rng(std::uint64_t seed, std::int64_t step) {
  return Rng(mix(mix(seed, 0x73746570ULL), static_cast<std::uint64_t>(step)));
}

double alpha_at(const TrainConfig& train, std::int64_t step, std::int64_t total_steps) {
  if (!train.biased_training.enabled) return 1.0;
  return alpha_schedule(step, total_steps, train.biased_training.alpha_early, train.biased_training.switch_fraction);
}

TrainResult train(const Config& config, const data::Dataset& dataset, const TrainOptions& options) {
  if (dataset.samples.empty()) throw ArgumentError("training dataset is empty");
  if (options.total_steps < 1) throw ArgumentError("total_steps must be >= 1");
  config.model.validate();
  config.train.validate();
  configure_determinism(options.deterministic);

  torch::manual_seed(options.seed);
  TrainResult result;
  result.model = Detector(config.model);
  auto& model = result.model;
  model->train();

  torch::optim::SGD optimizer(model->parameters(), torch::optim::SGDOptions(config.train.learning_rate)
                                                       .momentum(config.train.momentum)
                                                       .weight_decay(config.train.weight_decay));
  std::int64_t start = 0;
  if (options.resume_from) {
    const auto ckpt = load_checkpoint(*options.resume_from);
    if (model_hash(ckpt.config.model) != model_hash(config.model)) {
      throw CheckpointError("resume checkpoint was trained with a different model configuration");
    }
    if (ckpt.state.seed != options.seed || ckpt.state.total_steps != options.total_steps) {
      throw CheckpointError("resume checkpoint has a different seed or step budget");
    }
    restore_parameters(ckpt, *model);
    restore_optimizer(ckpt, *model, optimizer);
    start = ckpt.state.step;
  }

  std::ofstream log;
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    result.checkpoint = options.out_dir / "checkpoint.pt";
    result.metrics_log = options.out_dir / "metrics.ndjson";
    std::vector<std::string> kept;
    if (start > 0) {
      std::ifstream in(result.metrics_log);
      for (std::string line; std::getline(in, line);) {
        if (!line.empty() && nlohmann::json::parse(line).at("step").get<std::int64_t>() <= start) kept.push_back(line);
      }
    }
    log.open(result.metrics_log, std::ios::trunc);
    for (const auto& line : kept) log << line << '\n';
    if (!log) throw TrainingError("cannot write " + result.metrics_log.string());
  }
  TrainState state{start, options.total_steps, options.seed, config.train.biased_training};
  auto save = [&](const fs::path& path) {
    save_checkpoint(path, config, state, *model, &optimizer);
  };

  const auto t0 = std::chrono::steady_clock::now();
  const int accumulation = config.train.grad_accumulation;
  const double aux_weight = config.model.heads.quasi_multitask.aux_loss_weight;
  for (std::int64_t step = start; step < options.total_steps; ++step) {
    const double alpha = alpha_at(config.train, step, options.total_steps);
    const double lr = learning_rate_at(config.train, step);
    for (auto& group : optimizer.param_groups()) static_cast<torch::optim::SGDOptions&>(group.options()).lr(lr);
    optimizer.zero_grad();

    LossBundle mean{};
    mean.alpha = alpha;
    mean.aux_weight = aux_weight;
    bool has_grad = false;
    for (int micro = 0; micro < accumulation; ++micro) {
      const std::int64_t draw = step * accumulation + micro;
      auto rng = step_rng(options.seed, draw);
      const auto& sample = dataset.samples[sample_index(options.seed, draw, dataset.samples.size())];
      const auto raw = model->forward_train(sample, config.train, rng);
      const auto total = assemble_loss_tensor(raw.l_cls, raw.l_box, raw.l_mask, raw.aux, alpha, aux_weight);
      std::map<double, double> aux;
      for (const auto& [scale, v] : raw.aux) aux.emplace(scale, v.item<double>());
      LossBundle b;
      try {
        b = assemble_loss(raw.l_cls.item<double>(), raw.l_box.item<double>(), raw.l_mask.item<double>(), aux, alpha,
                          aux_weight);
      } catch (const TrainingError& e) {
        throw TrainingError("step " + std::to_string(step + 1) + ": " + e.what());
      }
      if (total.requires_grad()) {
        (total / static_cast<double>(accumulation)).backward();
        has_grad = true;
      }
      mean.l_cls += b.l_cls / accumulation;
      mean.l_box += b.l_box / accumulation;
      mean.l_mask += b.l_mask / accumulation;
      for (const auto& [scale, v] : b.aux_losses) mean.aux_losses[scale] += v / accumulation;
      mean.total += b.total / accumulation;
    }
    if (has_grad) {
      if (config.train.grad_clip_norm > 0) {
        torch::nn::utils::clip_grad_norm_(model->parameters(), config.train.grad_clip_norm);
      }
      optimizer.step();
    }
    state.step = step + 1;

    StepRecord record{step + 1, mean, lr,
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    if (log.is_open()) log << to_json(record).dump() << '\n' << std::flush;
    if (options.on_step) options.on_step(record);
    result.trace.push_back(std::move(record));
    if (!options.out_dir.empty() && config.train.checkpoint_every > 0 &&
        state.step % config.train.checkpoint_every == 0 && state.step < options.total_steps) {
      save(result.checkpoint);
    }
  }
  if (!options.out_dir.empty()) save(result.checkpoint);
  model->eval();
  return result;
}

}  // namespace maskcraft::training
