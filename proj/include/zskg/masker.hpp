#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zskg/kg_store.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

enum class EvalMode { standard, zsl, gzsl };

std::string_view to_string(EvalMode mode);
EvalMode eval_mode_from_string(std::string_view name);

struct MaskConfig {
  std::size_t k_r = 3;
  std::size_t k_e = 1;
  double score = 10.0;
  double tau = 0.01;
  EvalMode mode = EvalMode::standard;

  void validate() const;

  // Operating points: soft mask for regular VQA, hard mask for zero-shot.
  static MaskConfig soft_preset();
  static MaskConfig hard_preset();
};

// The three independent spaces used together at inference.
struct AlignmentModels {
  SpaceModel answer;
  SpaceModel relation;
  SpaceModel entity;
};

// Top-k target tokens of a space by similarity, descending, ties broken
// lexicographically. k is clamped to the vocabulary size.
std::vector<RankedToken> top_k_targets(const SpaceModel& space, std::span<const double> fused, std::size_t k);
std::vector<RankedToken> candidate_relations(const SpaceModel& relation_space, std::span<const double> fused,
                                             std::size_t k_r);
std::vector<RankedToken> candidate_entities(const SpaceModel& entity_space, std::span<const double> fused,
                                            std::size_t k_e);

// F . G(a) / tau, plus the mask score for members of c_tar, in candidate order.
Vector masked_scores(const SpaceModel& answer_space, std::span<const double> fused,
                     std::span<const std::string> candidates, const std::set<std::string>& c_tar,
                     const MaskConfig& config);

struct MaskedAnswer {
  std::string token;
  double score = 0.0;
  bool masked = false;
  std::optional<Triple> witness;
};

struct Prediction {
  std::vector<MaskedAnswer> ranking;
  std::vector<RankedToken> relations;
  std::vector<RankedToken> entities;
};

// Scores candidates given the raw fusion input (image features followed by
// question vector) that every space's own network consumes.
Prediction predict(const AlignmentModels& models, const KnowledgeGraph& kg, std::span<const double> input,
                   std::span<const std::string> candidates, const MaskConfig& config);

// Ranking order used everywhere: score descending, then token ascending.
bool ranks_before(double score_a, const std::string& a, double score_b, const std::string& b);

}  // namespace zskg
