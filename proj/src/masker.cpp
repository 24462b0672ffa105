#include "zskg/masker.hpp"

#include <algorithm>
#include <numeric>

#include "zskg/error.hpp"

namespace zskg {

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::standard: return "standard";
    case EvalMode::zsl: return "zsl";
    case EvalMode::gzsl: return "gzsl";
  }
  return "?";
}

EvalMode eval_mode_from_string(std::string_view name) {
  if (name == "standard") return EvalMode::standard;
  if (name == "zsl") return EvalMode::zsl;
  if (name == "gzsl") return EvalMode::gzsl;
  throw ContractError("unknown mode '" + std::string(name) + "' (expected standard, zsl or gzsl)");
}

void MaskConfig::validate() const {
  if (k_r < 1 || k_e < 1) throw ContractError("k_r and k_e must be at least 1");
  if (!(tau > 0.0)) throw ContractError("tau must be positive");
  if (score < 0.0) throw ContractError("mask score must be non-negative");
}

MaskConfig MaskConfig::soft_preset() { return {3, 1, 10.0, 0.01, EvalMode::standard}; }

MaskConfig MaskConfig::hard_preset() { return {25, 1, 100.0, 0.01, EvalMode::gzsl}; }

bool ranks_before(double score_a, const std::string& a, double score_b, const std::string& b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

std::vector<RankedToken> top_k_targets(const SpaceModel& space, std::span<const double> fused, std::size_t k) {
  const Vector sims = space.similarities_all(fused);
  const auto& tokens = space.targets().tokens();
  std::vector<std::size_t> order(sims.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, order.size());
  // Tokens are sorted, so row index order is the lexicographic tie-break.
  auto before = [&](std::size_t a, std::size_t b) { return sims[a] != sims[b] ? sims[a] > sims[b] : a < b; };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  std::vector<RankedToken> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({tokens[order[i]], sims[order[i]]});
  return out;
}

std::vector<RankedToken> candidate_relations(const SpaceModel& relation_space, std::span<const double> fused,
                                             std::size_t k_r) {
  return top_k_targets(relation_space, fused, k_r);
}

std::vector<RankedToken> candidate_entities(const SpaceModel& entity_space, std::span<const double> fused,
                                            std::size_t k_e) {
  return top_k_targets(entity_space, fused, k_e);
}

Vector masked_scores(const SpaceModel& answer_space, std::span<const double> fused,
                     std::span<const std::string> candidates, const std::set<std::string>& c_tar,
                     const MaskConfig& config) {
  if (candidates.empty()) throw ContractError("candidate list is empty");
  config.validate();
  Vector scores = answer_space.similarities(fused, answer_space.rows_of(candidates));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] /= config.tau;
    if (c_tar.contains(candidates[i])) scores[i] += config.score;
  }
  return scores;
}

namespace {

std::vector<std::string> tokens_of(const std::vector<RankedToken>& ranked) {
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.token);
  return out;
}

}  // namespace

Prediction predict(const AlignmentModels& models, const KnowledgeGraph& kg, std::span<const double> input,
                   std::span<const std::string> candidates, const MaskConfig& config) {
  config.validate();
  Prediction out;
  const Vector f_rel = models.relation.fused(input);
  const Vector f_ent = models.entity.fused(input);
  const Vector f_ans = models.answer.fused(input);
  out.relations = candidate_relations(models.relation, f_rel, config.k_r);
  out.entities = candidate_entities(models.entity, f_ent, config.k_e);
  const auto witnesses = target_set_with_witness(kg, tokens_of(out.entities), tokens_of(out.relations));
  std::set<std::string> c_tar;
  for (const auto& [t, _] : witnesses) c_tar.insert(t);

  const Vector scores = masked_scores(models.answer, f_ans, candidates, c_tar, config);
  out.ranking.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    MaskedAnswer a{candidates[i], scores[i], false, std::nullopt};
    if (auto it = witnesses.find(candidates[i]); it != witnesses.end()) {
      a.masked = true;
      a.witness = it->second;
    }
    out.ranking.push_back(std::move(a));
  }
  std::sort(out.ranking.begin(), out.ranking.end(), [](const MaskedAnswer& a, const MaskedAnswer& b) {
    return ranks_before(a.score, a.token, b.score, b.token);
  });
  return out;
}

}  // namespace zskg
