#pragma once

// Alignment spaces: an MLP fusion network F mapping (image feature, question)
// into a common space, and a target table G mapping answer / relation /
// support-entity tokens into the same space through frozen embeddings and an
// optional trainable projection. Compatibility is the temperature-scaled
// softmax over F(i,q) . G(a).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zskg/embedding.hpp"
#include "zskg/matrix.hpp"

namespace zskg {

enum class SpaceKind { answer, relation, entity };

std::string_view to_string(SpaceKind kind);
SpaceKind space_kind_from_string(std::string_view name);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Fully connected network; tanh on every hidden layer, identity on the output.
class FusionModel {
 public:
  FusionModel() = default;
  // Zero-initialized network with the given layer dims (input first).
  explicit FusionModel(std::vector<std::size_t> layer_dims);

  // Glorot-uniform weights, zero biases.
  static FusionModel glorot(std::vector<std::size_t> layer_dims, std::mt19937_64& rng);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  // Post-activation outputs of every layer, input first.
  struct Trace {
    std::vector<Vector> activations;
  };

  Vector forward(std::span<const double> input) const;
  Vector forward(std::span<const double> input, Trace& trace) const;
  // Accumulates parameter gradients into grad (same shape) given dLoss/dOutput.
  void backward(const Trace& trace, std::span<const double> grad_output, FusionModel& grad) const;

  friend bool operator==(const FusionModel&, const FusionModel&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

// Concatenates image features and question vector, then runs the network.
Vector fuse(const FusionModel& model, std::span<const double> image_feat, std::span<const double> question_vec);

// Frozen target inputs: one embedding-space row per token, tokens sorted.
class TargetTable {
 public:
  TargetTable() = default;
  TargetTable(std::vector<std::string> tokens, Matrix inputs);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t dim() const noexcept { return inputs_.cols(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const Matrix& inputs() const noexcept { return inputs_; }

  bool contains(const std::string& token) const { return index_.contains(token); }
  // Throws ContractError naming the token when absent.
  std::size_t row_of(const std::string& token) const;

  friend bool operator==(const TargetTable& a, const TargetTable& b) {
    return a.tokens_ == b.tokens_ && a.inputs_ == b.inputs_;
  }

 private:
  std::vector<std::string> tokens_;
  Matrix inputs_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SpaceParameters {
  FusionModel fusion;
  Matrix projection;  // common x embedding; empty when disabled

  // Spans over every trainable block in a fixed order.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  SpaceParameters zeros_like() const;
  std::size_t parameter_count() const;

  friend bool operator==(const SpaceParameters&, const SpaceParameters&) = default;
};

struct SpaceShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;
  std::size_t common_dim = 300;
  bool projection = true;
};

class SpaceModel {
 public:
  SpaceModel() = default;
  SpaceModel(SpaceKind kind, SpaceParameters params, TargetTable targets);

  // Builds target inputs from phrase vectors; tokens with no in-vocabulary
  // word are left out and reported through skipped (when given).
  static SpaceModel create(SpaceKind kind, const std::vector<std::string>& tokens, const EmbeddingTable& table,
                           const Lexicon& lexicon, const SpaceShape& shape, std::mt19937_64& rng,
                           std::vector<std::string>* skipped = nullptr);

  SpaceKind kind() const noexcept { return kind_; }
  std::size_t common_dim() const { return params_.fusion.output_dim(); }
  std::size_t input_dim() const { return params_.fusion.input_dim(); }
  bool has_projection() const { return params_.projection.size() != 0; }

  SpaceParameters& params() noexcept { return params_; }
  const SpaceParameters& params() const noexcept { return params_; }
  const TargetTable& targets() const noexcept { return targets_; }

  Vector fused(std::span<const double> input) const { return params_.fusion.forward(input); }
  // G(token) in the common space.
  Vector target_vector(const std::string& token) const;
  // F . G(token) for every listed target row.
  Vector similarities(std::span<const double> fused, std::span<const std::size_t> rows) const;
  Vector similarities_all(std::span<const double> fused) const;
  std::vector<std::size_t> rows_of(std::span<const std::string> tokens) const;

  friend bool operator==(const SpaceModel&, const SpaceModel&) = default;

 private:
  // Maps F into embedding space so similarities are row dots against inputs.
  Vector query(std::span<const double> fused) const;

  SpaceKind kind_ = SpaceKind::answer;
  SpaceParameters params_;
  TargetTable targets_;
};

// softmax(F . G(c) / tau) over the candidates, in candidate order.
Vector pmc_prob(const SpaceModel& space, std::span<const double> fused, std::span<const std::string> candidates,
                double tau);

// One supervised pair for a space: fusion input and gold target token.
struct TrainingExample {
  Vector input;
  std::string gold;
};

// -sum_n log P(gold_n | input_n). Throws when a gold token is not a candidate.
double loss(const SpaceModel& space, std::span<const TrainingExample> batch, std::span<const std::string> candidates,
            double tau);

struct LossAndGradient {
  double loss = 0.0;
  SpaceParameters gradient;
};

LossAndGradient grad(const SpaceModel& space, std::span<const TrainingExample> batch,
                     std::span<const std::string> candidates, double tau);

struct RankedToken {
  std::string token;
  double score = 0.0;
};

// Candidates by descending F . G(a); ties go to the lexicographically smaller token.
std::vector<RankedToken> predict_unmasked(const SpaceModel& space, std::span<const double> fused,
                                          std::span<const std::string> candidates);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Warm-up, plateau, step-decay learning-rate schedule.
struct LrSchedule {
  double base = 5e-4;
  double warmup_factor = 2.5;
  int warmup_epochs = 7;
  int decay_start = 14;
  int decay_end = 47;
  int decay_every = 3;
  double decay_rate = 0.7;
};

struct TrainConfig {
  std::size_t batch_size = 128;
  double tau = 0.01;
  int epochs = 48;
  int patience = 30;
  AdamConfig adam;
  LrSchedule schedule;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.1;
  SpaceShape shape;

  void validate() const;
};

double lr_schedule(const TrainConfig& config, int epoch);

class AdamState {
 public:
  explicit AdamState(const SpaceParameters& like);
  void step(SpaceParameters& params, const SpaceParameters& gradient, double lr, const AdamConfig& config);

 private:
  SpaceParameters m_;
  SpaceParameters v_;
  std::uint64_t t_ = 0;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;    // mean per example
  double holdout_loss = 0.0;  // mean per example
};

struct SpaceTrainLog {
  SpaceKind kind = SpaceKind::answer;
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double initial_holdout_loss = 0.0;
  double best_holdout_loss = 0.0;
  std::size_t examples = 0;
  std::size_t skipped = 0;
};

// Trains one space on its own examples with its own Adam state; keeps the
// parameters with the lowest hold-out loss. Deterministic for a fixed seed.
SpaceTrainLog train_space(SpaceModel& space, std::vector<TrainingExample> examples,
                          const std::vector<std::string>& candidates, const TrainConfig& config);

// Checkpoint container. Layout (all integers little-endian):
//   8 bytes  magic "ZSKGCKPT"
//   u32      format version (1)
//   u64      header length, then a JSON header: kind, layer_dims, activation,
//            common_dim, embedding_dim, projection flag, target tokens, config
//   f64[]    per layer weight (row-major) then bias; projection; target inputs
std::string serialize_checkpoint(const SpaceModel& space, const TrainConfig& config);
SpaceModel deserialize_checkpoint(std::string_view bytes, const std::string& source_name,
                                  TrainConfig* config = nullptr);
void save_checkpoint(const SpaceModel& space, const TrainConfig& config, const std::filesystem::path& path);
SpaceModel load_checkpoint(const std::filesystem::path& path, TrainConfig* config = nullptr);

}  // namespace zskg
