#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zskg/data.hpp"
#include "zskg/masker.hpp"

namespace zskg {

struct Metrics {
  std::size_t n = 0;
  double hit1 = 0.0;
  double hit3 = 0.0;
  double hit10 = 0.0;
  double mrr = 0.0;
  double mr = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// 1-based position of gold; throws ContractError when absent.
std::size_t rank_of_gold(std::span<const std::string> ranking, const std::string& gold);

// Hit@{1,3,10}, mean reciprocal rank and mean rank. Throws on empty input.
Metrics metrics(std::span<const std::size_t> ranks);

// Unweighted mean over splits; n is the total.
Metrics mean_metrics(std::span<const Metrics> per_split);

// Candidate answers for a mode: standard and gzsl use seen U unseen, zsl unseen only.
std::vector<std::string> candidate_pool(const AnswerSplit& answers, EvalMode mode);

// Everything needed to rank one test sample under any (k_r, k_e, s): the
// answer logits over the pool (already divided by tau) and the ranked
// relation / entity prefixes.
struct ScoredSample {
  std::string id;
  std::size_t gold = 0;  // index into the pool
  Vector logits;
  std::vector<std::string> relations;
  std::vector<std::string> entities;
};

struct ScoredSplit {
  EvalMode mode = EvalMode::standard;
  std::vector<std::string> pool;  // sorted
  std::vector<ScoredSample> samples;
  std::size_t excluded = 0;  // gold outside the pool, or no usable question vector
};

struct ScoringOptions {
  double tau = 0.01;
  std::size_t max_k_r = 25;
  std::size_t max_k_e = 25;
  unsigned threads = 1;
};

ScoredSplit score_split(const AlignmentModels& models, const Dataset& test, const AnswerSplit& answers, EvalMode mode,
                        const EmbeddingTable& embeddings, const Lexicon& lexicon, const ScoringOptions& options);

// Gold ranks after masking with the top-k_r relations / top-k_e entities.
std::vector<std::size_t> masked_ranks(const ScoredSplit& scored, const KnowledgeGraph& kg, std::size_t k_r,
                                      std::size_t k_e, double mask_score);

// Largest (max - min) logit spread over all samples: any larger mask score
// is a hard mask for this split.
double logit_span(const ScoredSplit& scored);

struct EvalReport {
  EvalMode mode = EvalMode::standard;
  MaskConfig mask;
  Metrics overall;              // cross-split mean
  std::vector<Metrics> per_split;
  std::size_t excluded = 0;
  nlohmann::ordered_json config;  // resolved run configuration, echoed verbatim

  nlohmann::ordered_json to_json() const;
};

EvalReport evaluate(const AlignmentModels& models, const KnowledgeGraph& kg, const Dataset& test,
                    const AnswerSplit& answers, const MaskConfig& config, const EmbeddingTable& embeddings,
                    const Lexicon& lexicon, unsigned threads = 1);

// Several splits, each with its own models, averaged.
EvalReport evaluate_scored(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg, const MaskConfig& config);

struct SweepRow {
  std::size_t k_r = 0;
  std::size_t k_e = 0;
  double score = 0.0;
  Metrics metrics;
};

std::vector<SweepRow> mask_score_sweep(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg,
                                       std::size_t k_r, std::size_t k_e, std::span<const double> scores);
std::vector<SweepRow> k_grid_sweep(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg,
                                   std::span<const std::size_t> k_r_values, std::span<const std::size_t> k_e_values,
                                   double mask_score);

// Header "k_r,k_e,s,hit1,hit3,hit10,mrr,mr".
std::string sweep_csv(std::span<const SweepRow> rows);

nlohmann::ordered_json to_json(const Metrics& m);

}  // namespace zskg
