#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "maskcraft/config.hpp"
#include "maskcraft/data/sample.hpp"
#include "maskcraft/detector.hpp"
#include "maskcraft/eval/coco_eval.hpp"

namespace maskcraft::eval {

/// Detections for every image, in dataset order.
std::vector<Prediction> run_inference(Detector& model, const data::Dataset& dataset, const EvalConfig& config);

EvalParams eval_params(const EvalConfig& config);

/// Inference plus AP for each requested task. Throws ArgumentError on an
/// empty dataset.
std::map<Task, APReport> evaluate_model(Detector& model, const data::Dataset& dataset, const EvalConfig& config,
                                        const std::vector<Task>& tasks = {Task::kSegm, Task::kBbox},
                                        std::vector<Prediction>* predictions = nullptr);

/// Loads the checkpoint (refusing an architecture other than `expected` when
/// given) and evaluates it with the checkpoint's own evaluation settings.
std::map<Task, APReport> evaluate_checkpoint(const std::filesystem::path& checkpoint, const data::Dataset& dataset,
                                             const ModelConfig* expected = nullptr,
                                             const std::vector<Task>& tasks = {Task::kSegm, Task::kBbox});

}  // namespace maskcraft::eval
