#include "maskcraft/training/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "maskcraft/errors.hpp"

namespace maskcraft::training {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

void* momentum_key(const torch::Tensor& p) { return p.unsafeGetTensorImpl(); }

c10::Dict<std::string, torch::Tensor> to_dict(const std::map<std::string, torch::Tensor>& m) {
  c10::Dict<std::string, torch::Tensor> d;
  for (const auto& [k, v] : m) d.insert(k, v.detach().clone().contiguous());
  return d;
}

std::map<std::string, torch::Tensor> from_dict(const c10::IValue& v) {
  std::map<std::string, torch::Tensor> out;
  for (const auto& entry : v.toGenericDict()) out.emplace(entry.key().toStringRef(), entry.value().toTensor());
  return out;
}

}  // namespace

void save_checkpoint(const fs::path& path, const Config& config, const TrainState& state,
                     const torch::nn::Module& model, const torch::optim::SGD* optimizer) {
  std::map<std::string, torch::Tensor> tensors, momentum;
  for (const auto& item : model.named_parameters()) tensors.emplace(item.key(), item.value());
  for (const auto& item : model.named_buffers()) tensors.emplace(item.key(), item.value());
  if (optimizer) {
    const auto& st = optimizer->state();
    for (const auto& item : model.named_parameters()) {
      const auto it = st.find(momentum_key(item.value()));
      if (it == st.end()) continue;
      const auto& buf = static_cast<const torch::optim::SGDParamState&>(*it->second).momentum_buffer();
      if (buf.defined()) momentum.emplace(item.key(), buf);
    }
  }
  const json manifest{{"format", kFormatVersion},
                      {"config", to_json(config)},
                      {"model_hash", model_hash(config.model)},
                      {"head_hash", head_hash(config.model.heads)},
                      {"heads", to_json(config.model.heads)},
                      {"step", state.step},
                      {"total_steps", state.total_steps},
                      {"seed", state.seed},
                      {"alpha",
                       {{"enabled", state.alpha.enabled},
                        {"alpha_early", state.alpha.alpha_early},
                        {"switch_fraction", state.alpha.switch_fraction}}}};
  const auto tuple = c10::ivalue::Tuple::create({manifest.dump(), to_dict(tensors), to_dict(momentum)});
  const auto bytes = torch::pickle_save(tuple);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Checkpoint ckpt;
  json manifest;
  try {
    const auto value = torch::pickle_load(bytes);
    const auto& elems = value.toTupleRef().elements();
    if (elems.size() != 3) throw CheckpointError("unexpected archive layout");
    manifest = json::parse(elems[0].toStringRef());
    ckpt.tensors = from_dict(elems[1]);
    ckpt.momentum = from_dict(elems[2]);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path.string() + ": malformed checkpoint: " + e.what());
  }
  try {
    if (manifest.at("format").get<int>() != kFormatVersion) throw CheckpointError("unsupported checkpoint format");
    ckpt.config = config_from_json(manifest.at("config"));
    ckpt.model_hash = manifest.at("model_hash").get<std::string>();
    ckpt.head_hash = manifest.at("head_hash").get<std::string>();
    ckpt.state.step = manifest.at("step").get<std::int64_t>();
    ckpt.state.total_steps = manifest.at("total_steps").get<std::int64_t>();
    ckpt.state.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& a = manifest.at("alpha");
    ckpt.state.alpha = {a.at("enabled").get<bool>(), a.at("alpha_early").get<double>(),
                        a.at("switch_fraction").get<double>()};
    if (head_config_from_json(manifest.at("heads")) != ckpt.config.model.heads) {
      throw CheckpointError("manifest head configuration disagrees with stored config");
    }
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path.string() + ": malformed manifest: " + e.what());
  }
  if (ckpt.model_hash != model_hash(ckpt.config.model) || ckpt.head_hash != head_hash(ckpt.config.model.heads)) {
    throw CheckpointError(path.string() + ": manifest hash does not match stored config");
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, torch::nn::Module& model) {
  torch::NoGradGuard no_grad;
  auto copy = [&](const std::string& name, torch::Tensor& dst) {
    const auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw CheckpointError("checkpoint lacks tensor " + name);
    if (it->second.sizes() != dst.sizes()) throw CheckpointError("shape mismatch for " + name);
    dst.copy_(it->second);
  };
  std::size_t expected = 0;
  for (auto& item : model.named_parameters()) {
    copy(item.key(), item.value());
    ++expected;
  }
  for (auto& item : model.named_buffers()) {
    copy(item.key(), item.value());
    ++expected;
  }
  if (expected != ckpt.tensors.size()) throw CheckpointError("checkpoint holds tensors the model does not have");
}

void restore_optimizer(const Checkpoint& ckpt, const torch::nn::Module& model, torch::optim::SGD& optimizer) {
  auto& st = optimizer.state();
  for (const auto& item : model.named_parameters()) {
    const auto it = ckpt.momentum.find(item.key());
    if (it == ckpt.momentum.end()) continue;
    auto state = std::make_unique<torch::optim::SGDParamState>();
    state->momentum_buffer(it->second.clone());
    st[momentum_key(item.value())] = std::move(state);
  }
}

Detector load_model(const Checkpoint& ckpt, const ModelConfig* expected) {
  if (expected) {
    if (head_hash(expected->heads) != ckpt.head_hash) {
      throw CheckpointError("head configuration does not match the checkpoint");
    }
    if (model_hash(*expected) != ckpt.model_hash) {
      throw CheckpointError("model configuration does not match the checkpoint");
    }
  }
  Detector model(ckpt.config.model);
  restore_parameters(ckpt, *model);
  model->eval();
  return model;
}

}  // namespace maskcraft::training
