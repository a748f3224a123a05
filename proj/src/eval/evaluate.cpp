#include "maskcraft/eval/evaluate.hpp"

#include "maskcraft/errors.hpp"
#include "maskcraft/training/checkpoint.hpp"

namespace maskcraft::eval {

std::vector<Prediction> run_inference(Detector& model, const data::Dataset& dataset, const EvalConfig& config) {
  model->eval();
  std::vector<Prediction> out;
  for (const auto& sample : dataset.samples) {
    for (auto& d : model->infer(sample, config)) {
      out.push_back({sample.image_id, d.category_id, d.score, d.box, std::move(d.mask)});
    }
  }
  return out;
}

EvalParams eval_params(const EvalConfig& config) {
  auto p = EvalParams::with_buckets(config.area_small, config.area_large);
  p.max_detections = config.max_detections;
  return p;
}

std::map<Task, APReport> evaluate_model(Detector& model, const data::Dataset& dataset, const EvalConfig& config,
                                        const std::vector<Task>& tasks, std::vector<Prediction>* predictions) {
  if (dataset.samples.empty()) throw ArgumentError("evaluation dataset is empty");
  auto preds = run_inference(model, dataset, config);
  std::map<Task, APReport> out;
  for (Task t : tasks) out[t] = compute_ap(preds, dataset, t, eval_params(config));
  if (predictions) *predictions = std::move(preds);
  return out;
}

std::map<Task, APReport> evaluate_checkpoint(const std::filesystem::path& checkpoint, const data::Dataset& dataset,
                                             const ModelConfig* expected, const std::vector<Task>& tasks) {
  const auto ckpt = training::load_checkpoint(checkpoint);
  auto model = training::load_model(ckpt, expected);
  return evaluate_model(model, dataset, ckpt.config.eval, tasks);
}

}  // namespace maskcraft::eval
