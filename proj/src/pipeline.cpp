#include "zskg/pipeline.hpp"

#include <charconv>

#include "zskg/error.hpp"
#include "zskg/io.hpp"

namespace zskg {

SpaceExamples build_examples(const Dataset& train, const Resources& res) {
  SpaceExamples out;
  for (const auto& s : train.samples) {
    bool oov = false;
    Vector input = fusion_input(train, s, res.embeddings, res.lexicon, &oov);
    if (oov) {
      ++out.skipped_oov;
      continue;
    }
    if (s.fact) {
      out.relation.push_back({input, s.fact->relation});
      out.entity.push_back({input, *s.support_entity()});
    }
    out.answer.push_back({std::move(input), s.answer});
  }
  return out;
}

TrainedModels train_models(const DatasetSplit& split, const Resources& res, const TrainConfig& config) {
  config.validate();
  if (split.train.size() == 0) throw ContractError("training set is empty");
  TrainConfig cfg = config;
  cfg.shape.input_dim = split.train.features->dim() + res.embeddings.dim();

  std::mt19937_64 rng(cfg.seed);
  const auto pool = split.answers.pool();
  const std::vector<std::string> answer_vocab(pool.begin(), pool.end());
  const std::vector<std::string> relation_vocab(res.kg.relations().begin(), res.kg.relations().end());
  const std::vector<std::string> entity_vocab(res.kg.entities().begin(), res.kg.entities().end());

  TrainedModels out;
  out.config = cfg;
  out.models.answer = SpaceModel::create(SpaceKind::answer, answer_vocab, res.embeddings, res.lexicon, cfg.shape, rng);
  out.models.relation =
      SpaceModel::create(SpaceKind::relation, relation_vocab, res.embeddings, res.lexicon, cfg.shape, rng);
  out.models.entity = SpaceModel::create(SpaceKind::entity, entity_vocab, res.embeddings, res.lexicon, cfg.shape, rng);

  auto examples = build_examples(split.train, res);
  out.skipped_oov = examples.skipped_oov;
  const std::vector<std::string> seen(split.answers.seen.begin(), split.answers.seen.end());
  out.logs.push_back(train_space(out.models.answer, std::move(examples.answer), seen, cfg));
  out.logs.push_back(train_space(out.models.relation, std::move(examples.relation), relation_vocab, cfg));
  out.logs.push_back(train_space(out.models.entity, std::move(examples.entity), entity_vocab, cfg));
  return out;
}

void save_models(const AlignmentModels& models, const TrainConfig& config, const std::filesystem::path& dir) {
  save_checkpoint(models.answer, config, dir / "answer.ckpt");
  save_checkpoint(models.relation, config, dir / "relation.ckpt");
  save_checkpoint(models.entity, config, dir / "entity.ckpt");
}

AlignmentModels load_models(const std::filesystem::path& dir, TrainConfig* config) {
  AlignmentModels m;
  m.answer = load_checkpoint(dir / "answer.ckpt", config);
  m.relation = load_checkpoint(dir / "relation.ckpt");
  m.entity = load_checkpoint(dir / "entity.ckpt");
  if (m.answer.kind() != SpaceKind::answer || m.relation.kind() != SpaceKind::relation ||
      m.entity.kind() != SpaceKind::entity) {
    throw ParseError(dir.string(), 0, "checkpoint kinds do not match their file names");
  }
  return m;
}

std::string training_log_csv(const std::vector<SpaceTrainLog>& logs) {
  std::string out = "epoch,space,lr,train_loss,holdout_loss\n";
  char buf[32];
  auto num = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
  };
  for (const auto& log : logs) {
    for (const auto& e : log.epochs) {
      out += std::to_string(e.epoch) + "," + std::string(to_string(log.kind)) + ",";
      num(e.lr);
      out += ',';
      num(e.train_loss);
      out += ',';
      num(e.holdout_loss);
      out += '\n';
    }
  }
  return out;
}

}  // namespace zskg
