#include "maskcraft/scaffold/detection_head.hpp"

namespace maskcraft::scaffold {

DetectionHeadImpl::DetectionHeadImpl(int in_channels, int roi_size, int fc_dim, int num_classes)
    : in_features_(in_channels * roi_size * roi_size), num_classes_(num_classes) {
  fc1 = register_module("fc1", torch::nn::Linear(in_features_, fc_dim));
  fc2 = register_module("fc2", torch::nn::Linear(fc_dim, fc_dim));
  cls_score = register_module("cls_score", torch::nn::Linear(fc_dim, num_classes + 1));
  bbox_pred = register_module("bbox_pred", torch::nn::Linear(fc_dim, num_classes * 4));
  torch::NoGradGuard no_grad;
  torch::nn::init::normal_(cls_score->weight, 0.0, 0.01);
  torch::nn::init::zeros_(cls_score->bias);
  torch::nn::init::normal_(bbox_pred->weight, 0.0, 0.001);
  torch::nn::init::zeros_(bbox_pred->bias);
}

DetectionOutputs DetectionHeadImpl::forward(const torch::Tensor& roi_features) {
  const int64_t n = roi_features.size(0);
  auto x = roi_features.reshape({n, in_features_});
  x = torch::relu(fc1->forward(x));
  x = torch::relu(fc2->forward(x));
  return {cls_score->forward(x), bbox_pred->forward(x).view({n, num_classes_, 4})};
}

}  // namespace maskcraft::scaffold
