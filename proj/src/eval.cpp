#include "zskg/eval.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

#include "zskg/error.hpp"

namespace zskg {

std::size_t rank_of_gold(std::span<const std::string> ranking, const std::string& gold) {
  auto it = std::find(ranking.begin(), ranking.end(), gold);
  if (it == ranking.end()) throw ContractError("gold answer '" + gold + "' is not in the ranking");
  return static_cast<std::size_t>(it - ranking.begin()) + 1;
}

Metrics metrics(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ContractError("no ranks to summarize");
  Metrics m;
  m.n = ranks.size();
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  double rr = 0.0, r = 0.0;
  for (std::size_t k : ranks) {
    if (k == 0) throw ContractError("ranks are 1-based");
    h1 += k <= 1;
    h3 += k <= 3;
    h10 += k <= 10;
    rr += 1.0 / static_cast<double>(k);
    r += static_cast<double>(k);
  }
  const double n = static_cast<double>(m.n);
  m.hit1 = static_cast<double>(h1) / n;
  m.hit3 = static_cast<double>(h3) / n;
  m.hit10 = static_cast<double>(h10) / n;
  m.mrr = rr / n;
  m.mr = r / n;
  return m;
}

Metrics mean_metrics(std::span<const Metrics> per_split) {
  if (per_split.empty()) throw ContractError("no splits to average");
  Metrics out;
  for (const auto& m : per_split) {
    out.n += m.n;
    out.hit1 += m.hit1;
    out.hit3 += m.hit3;
    out.hit10 += m.hit10;
    out.mrr += m.mrr;
    out.mr += m.mr;
  }
  const double k = static_cast<double>(per_split.size());
  out.hit1 /= k;
  out.hit3 /= k;
  out.hit10 /= k;
  out.mrr /= k;
  out.mr /= k;
  return out;
}

std::vector<std::string> candidate_pool(const AnswerSplit& answers, EvalMode mode) {
  const std::set<std::string> pool = mode == EvalMode::zsl ? answers.unseen : answers.pool();
  return {pool.begin(), pool.end()};
}

namespace {

std::vector<std::string> tokens_of(const std::vector<RankedToken>& ranked) {
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.token);
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([=, &fn] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ScoredSplit score_split(const AlignmentModels& models, const Dataset& test, const AnswerSplit& answers, EvalMode mode,
                        const EmbeddingTable& embeddings, const Lexicon& lexicon, const ScoringOptions& options) {
  if (!(options.tau > 0.0)) throw ContractError("tau must be positive");
  ScoredSplit out;
  out.mode = mode;
  for (auto& a : candidate_pool(answers, mode)) {
    if (models.answer.targets().contains(a)) out.pool.push_back(std::move(a));
  }
  const auto pool_rows = models.answer.rows_of(out.pool);

  std::vector<std::optional<ScoredSample>> slots(test.size());
  parallel_for(test.size(), options.threads, [&](std::size_t i) {
    const Sample& s = test.samples[i];
    auto it = std::lower_bound(out.pool.begin(), out.pool.end(), s.answer);
    if (it == out.pool.end() || *it != s.answer) return;
    bool oov = false;
    const Vector input = fusion_input(test, s, embeddings, lexicon, &oov);
    if (oov) return;
    ScoredSample sc;
    sc.id = s.id;
    sc.gold = static_cast<std::size_t>(it - out.pool.begin());
    sc.logits = models.answer.similarities(models.answer.fused(input), pool_rows);
    for (double& x : sc.logits) x /= options.tau;
    sc.relations = tokens_of(top_k_targets(models.relation, models.relation.fused(input), options.max_k_r));
    sc.entities = tokens_of(top_k_targets(models.entity, models.entity.fused(input), options.max_k_e));
    slots[i] = std::move(sc);
  });
  for (auto& s : slots) {
    if (s) {
      out.samples.push_back(std::move(*s));
    } else {
      ++out.excluded;
    }
  }
  return out;
}

std::vector<std::size_t> masked_ranks(const ScoredSplit& scored, const KnowledgeGraph& kg, std::size_t k_r,
                                      std::size_t k_e, double mask_score) {
  std::vector<std::size_t> ranks;
  ranks.reserve(scored.samples.size());
  std::vector<std::string> c_rel, c_ent;
  for (const auto& s : scored.samples) {
    c_rel.assign(s.relations.begin(), s.relations.begin() + static_cast<std::ptrdiff_t>(std::min(k_r, s.relations.size())));
    c_ent.assign(s.entities.begin(), s.entities.begin() + static_cast<std::ptrdiff_t>(std::min(k_e, s.entities.size())));
    const auto c_tar = mask_score != 0.0 ? target_set(kg, c_ent, c_rel) : std::set<std::string>{};
    auto score_of = [&](std::size_t c) {
      return c_tar.contains(scored.pool[c]) ? s.logits[c] + mask_score : s.logits[c];
    };
    const double gold_score = score_of(s.gold);
    const std::string& gold = scored.pool[s.gold];
    std::size_t rank = 1;
    for (std::size_t c = 0; c < scored.pool.size(); ++c) {
      if (c != s.gold && ranks_before(score_of(c), scored.pool[c], gold_score, gold)) ++rank;
    }
    ranks.push_back(rank);
  }
  return ranks;
}

double logit_span(const ScoredSplit& scored) {
  double span = 0.0;
  for (const auto& s : scored.samples) {
    auto [lo, hi] = std::minmax_element(s.logits.begin(), s.logits.end());
    span = std::max(span, *hi - *lo);
  }
  return span;
}

nlohmann::ordered_json to_json(const Metrics& m) {
  return {{"n", m.n}, {"hit1", m.hit1}, {"hit3", m.hit3}, {"hit10", m.hit10}, {"mrr", m.mrr}, {"mr", m.mr}};
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = std::string(zskg::to_string(mode));
  j["mask"] = {{"k_r", mask.k_r}, {"k_e", mask.k_e}, {"mask_score", mask.score}, {"tau", mask.tau}};
  j["n_samples"] = overall.n;
  j["excluded"] = excluded;
  auto core = zskg::to_json(overall);
  for (auto& [k, v] : core.items()) {
    if (k != "n") j[k] = v;
  }
  auto& splits = j["per_split"] = nlohmann::ordered_json::array();
  for (const auto& m : per_split) splits.push_back(zskg::to_json(m));
  j["config"] = config;
  return j;
}

EvalReport evaluate_scored(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg, const MaskConfig& config) {
  config.validate();
  EvalReport report;
  report.mode = config.mode;
  report.mask = config;
  for (const auto& s : splits) {
    report.excluded += s.excluded;
    if (s.samples.empty()) continue;
    report.per_split.push_back(metrics(masked_ranks(s, kg, config.k_r, config.k_e, config.score)));
  }
  if (report.per_split.empty()) throw ContractError("no evaluable samples in any split");
  report.overall = mean_metrics(report.per_split);
  return report;
}

EvalReport evaluate(const AlignmentModels& models, const KnowledgeGraph& kg, const Dataset& test,
                    const AnswerSplit& answers, const MaskConfig& config, const EmbeddingTable& embeddings,
                    const Lexicon& lexicon, unsigned threads) {
  config.validate();
  ScoringOptions opts{config.tau, config.k_r, config.k_e, threads};
  const ScoredSplit scored = score_split(models, test, answers, config.mode, embeddings, lexicon, opts);
  return evaluate_scored(std::span(&scored, 1), kg, config);
}

std::vector<SweepRow> mask_score_sweep(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg,
                                       std::size_t k_r, std::size_t k_e, std::span<const double> scores) {
  std::vector<SweepRow> rows;
  for (double s : scores) {
    MaskConfig c{k_r, k_e, s, 1.0, EvalMode::standard};
    rows.push_back({k_r, k_e, s, evaluate_scored(splits, kg, c).overall});
  }
  return rows;
}

std::vector<SweepRow> k_grid_sweep(std::span<const ScoredSplit> splits, const KnowledgeGraph& kg,
                                   std::span<const std::size_t> k_r_values, std::span<const std::size_t> k_e_values,
                                   double mask_score) {
  std::vector<SweepRow> rows;
  for (std::size_t kr : k_r_values) {
    for (std::size_t ke : k_e_values) {
      MaskConfig c{kr, ke, mask_score, 1.0, EvalMode::standard};
      rows.push_back({kr, ke, mask_score, evaluate_scored(splits, kg, c).overall});
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "k_r,k_e,s,hit1,hit3,hit10,mrr,mr\n";
  char buf[32];
  auto num = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.k_r) + "," + std::to_string(r.k_e) + ",";
    num(r.score);
    for (double v : {r.metrics.hit1, r.metrics.hit3, r.metrics.hit10, r.metrics.mrr, r.metrics.mr}) {
      out += ',';
      num(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace zskg
