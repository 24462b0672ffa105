#include <cmath>

#include "zskg/error.hpp"
#include "zskg/kernels.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

FusionModel::FusionModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw ContractError("fusion network needs at least input and output dims");
  for (std::size_t d : dims_) {
    if (d == 0) throw ContractError("fusion layer dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layers_.push_back({Matrix(dims_[l + 1], dims_[l]), Vector(dims_[l + 1], 0.0)});
  }
}

FusionModel FusionModel::glorot(std::vector<std::size_t> layer_dims, std::mt19937_64& rng) {
  FusionModel m(std::move(layer_dims));
  for (auto& layer : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weight.flat()) w = dist(rng);
  }
  return m;
}

Vector FusionModel::forward(std::span<const double> input) const {
  Trace trace;
  return forward(input, trace);
}

Vector FusionModel::forward(std::span<const double> input, Trace& trace) const {
  if (input.size() != input_dim()) {
    throw ContractError("fusion input has dim " + std::to_string(input.size()) + ", expected " +
                        std::to_string(input_dim()));
  }
  trace.activations.resize(layers_.size() + 1);
  trace.activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Vector& out = trace.activations[l + 1];
    out.resize(layer.weight.rows());
    kernels::gemv(layer.weight, trace.activations[l], out);
    const bool hidden = l + 1 < layers_.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += layer.bias[i];
      if (hidden) out[i] = std::tanh(out[i]);
    }
  }
  return trace.activations.back();
}

void FusionModel::backward(const Trace& trace, std::span<const double> grad_output, FusionModel& grad) const {
  Vector delta(grad_output.begin(), grad_output.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    auto& g = grad.layers_[l];
    const Vector& in = trace.activations[l];
    kernels::rank1_update(1.0, delta, in, g.weight);
    kernels::axpy(1.0, delta, g.bias);
    if (l == 0) break;
    Vector prev(layer.weight.cols(), 0.0);
    kernels::gemv_transposed_acc(layer.weight, delta, prev);
    // tanh' = 1 - tanh^2, and in holds the post-activation values.
    for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= 1.0 - in[i] * in[i];
    delta = std::move(prev);
  }
}

Vector fuse(const FusionModel& model, std::span<const double> image_feat, std::span<const double> question_vec) {
  if (image_feat.size() + question_vec.size() != model.input_dim()) {
    throw ContractError("image (" + std::to_string(image_feat.size()) + ") + question (" +
                        std::to_string(question_vec.size()) + ") dims do not match fusion input " +
                        std::to_string(model.input_dim()));
  }
  Vector input;
  input.reserve(model.input_dim());
  input.insert(input.end(), image_feat.begin(), image_feat.end());
  input.insert(input.end(), question_vec.begin(), question_vec.end());
  return model.forward(input);
}

}  // namespace zskg
