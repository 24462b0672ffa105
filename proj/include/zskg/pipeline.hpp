#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zskg/data.hpp"
#include "zskg/embedding.hpp"
#include "zskg/kg_store.hpp"
#include "zskg/masker.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

struct Resources {
  const KnowledgeGraph& kg;
  const EmbeddingTable& embeddings;
  const Lexicon& lexicon;
};

struct TrainedModels {
  AlignmentModels models;
  std::vector<SpaceTrainLog> logs;  // answer, relation, entity
  std::size_t skipped_oov = 0;      // train samples without a question vector
  TrainConfig config;               // as used, with the input dim filled in
};

// Builds the three spaces for a split and trains each on its own loss:
// answers over the seen pool, relations over the KG relation vocabulary,
// support entities over the KG entity vocabulary.
TrainedModels train_models(const DatasetSplit& split, const Resources& res, const TrainConfig& config);

// Per-space examples, exposed for tests.
struct SpaceExamples {
  std::vector<TrainingExample> answer;
  std::vector<TrainingExample> relation;
  std::vector<TrainingExample> entity;
  std::size_t skipped_oov = 0;
};
SpaceExamples build_examples(const Dataset& train, const Resources& res);

void save_models(const AlignmentModels& models, const TrainConfig& config, const std::filesystem::path& dir);
AlignmentModels load_models(const std::filesystem::path& dir, TrainConfig* config = nullptr);

// "epoch,space,lr,train_loss,holdout_loss" rows.
std::string training_log_csv(const std::vector<SpaceTrainLog>& logs);

}  // namespace zskg
