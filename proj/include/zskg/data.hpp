#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zskg/embedding.hpp"
#include "zskg/kg_store.hpp"
#include "zskg/matrix.hpp"

namespace zskg {

struct Sample {
  std::string id;
  std::string image_feature_id;
  std::string question;
  std::string answer;
  std::optional<Triple> fact;

  // The fact endpoint that is not the answer; nullopt without a fact.
  std::optional<std::string> support_entity() const;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Image feature vectors keyed by image id, all of one dimension.
class FeatureTable {
 public:
  explicit FeatureTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool contains(const std::string& id) const { return rows_.contains(id); }
  void add(std::string id, Vector values);
  // Throws ContractError on an unknown id.
  const Vector& at(const std::string& id) const;
  const std::map<std::string, Vector>& rows() const noexcept { return rows_; }

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;

 private:
  std::size_t dim_;
  std::map<std::string, Vector> rows_;
};

// Samples plus the image features they reference. Subsets share the feature table.
struct Dataset {
  std::vector<Sample> samples;
  std::shared_ptr<const FeatureTable> features = std::make_shared<FeatureTable>();

  std::size_t size() const noexcept { return samples.size(); }
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct LoadReport {
  // "id: reason" per rejected sample.
  std::vector<std::string> rejected;
};

// Samples: JSON lines {"id","img_id","question","answer","fact":{"h","r","t"}?}.
// Features: header "#dim D" then "img_id v1 ... vD" per line. Answer and fact
// tokens go through lexicon normalization (case-folding without one).
Dataset load_dataset(const std::filesystem::path& samples_path, const std::filesystem::path& features_path,
                     LoadReport* report = nullptr, const Lexicon* lexicon = nullptr);
Dataset parse_dataset(const std::string& samples_text, const std::string& features_text,
                      const std::string& samples_name, const std::string& features_name,
                      LoadReport* report = nullptr, const Lexicon* lexicon = nullptr);
std::string serialize_samples(const Dataset& ds);
std::string serialize_features(const FeatureTable& features);
void save_dataset(const Dataset& ds, const std::filesystem::path& samples_path,
                  const std::filesystem::path& features_path);

// Most frequent answers, frequency descending then lexicographic.
std::vector<std::string> top_k_answers(const Dataset& ds, std::size_t k);

struct PoolFilter {
  Dataset kept;
  std::size_t dropped = 0;
};
PoolFilter filter_to_pool(const Dataset& ds, const std::vector<std::string>& pool);

struct AnswerSplit {
  std::set<std::string> seen;
  std::set<std::string> unseen;
  int repeat_index = 0;

  std::set<std::string> pool() const;
};

enum class SplitKind { zero_shot, standard };

struct SplitManifest {
  SplitKind kind = SplitKind::zero_shot;
  std::uint64_t seed = 0;
  AnswerSplit answers;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
  AnswerSplit answers;
  SplitKind kind = SplitKind::zero_shot;
  std::uint64_t seed = 0;

  SplitManifest manifest() const;
};

// Per repeat: the pool is shuffled by a generator seeded from (seed, repeat);
// the first ceil(n/2) answers are seen, the rest unseen; each pooled sample
// goes to train iff its answer is seen. Samples outside the pool are skipped.
std::vector<DatasetSplit> zero_shot_split(const Dataset& ds, const std::vector<std::string>& pool,
                                          std::uint64_t seed, int repeats = 5);

// Sample-level random split (regular VQA): every pool answer is "seen" and
// the test fraction of pooled samples is held out.
std::vector<DatasetSplit> standard_split(const Dataset& ds, const std::vector<std::string>& pool, std::uint64_t seed,
                                         int repeats = 5, double test_fraction = 0.5);

std::string serialize_manifest(const SplitManifest& m);
SplitManifest parse_manifest(const std::string& text, const std::string& source_name);
SplitManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const SplitManifest& m, const std::filesystem::path& path);
// Rebuilds the split; throws ParseError when an id is missing from the dataset.
DatasetSplit apply_manifest(const Dataset& ds, const SplitManifest& m);

struct ColumnStats {
  std::size_t train_classes = 0;
  std::size_t test_classes = 0;
  std::size_t class_overlap = 0;
  // Test instances whose value also occurs in train.
  std::size_t instance_overlap = 0;
};

struct SplitStats {
  std::size_t train_instances = 0;
  std::size_t test_instances = 0;
  ColumnStats images;
  ColumnStats questions;
  ColumnStats answers;
  ColumnStats support_entities;
};

SplitStats split_stats(const Dataset& train, const Dataset& test);

struct SyntheticSpec {
  std::size_t n_entities = 400;
  std::size_t n_relations = 20;
  std::size_t n_answers = 200;
  std::size_t n_samples = 4000;
  std::size_t feature_dim = 64;
  double noise = 0.5;
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 50;
  std::size_t relations_per_entity = 3;
  // 0 picks n_samples / 2.
  std::size_t n_images = 0;
};

struct SyntheticBenchmark {
  Dataset dataset;
  KnowledgeGraph kg;
  EmbeddingTable embeddings;
};

// Random KG where every (support entity, relation) pair used by a sample has
// exactly one neighbor, its answer. Image features are a per-entity prototype
// plus Gaussian noise; questions name the relation through a fixed template.
SyntheticBenchmark gen_synthetic(const SyntheticSpec& spec);

std::string synthetic_question(const std::string& relation);

// Fusion input for a sample: image features followed by the question's
// phrase vector. oov is set when no question word has an embedding.
Vector fusion_input(const Dataset& ds, const Sample& sample, const EmbeddingTable& table, const Lexicon& lexicon,
                    bool* oov = nullptr);

}  // namespace zskg
