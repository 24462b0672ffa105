#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "zskg/data.hpp"
#include "zskg/error.hpp"

namespace zskg {

namespace {

std::string numbered(const char* prefix, std::size_t i, std::size_t count) {
  int width = 1;
  for (std::size_t n = count; n >= 10; n /= 10) ++width;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

constexpr const char* kTemplateWords[] = {"which", "thing", "is", "of", "it"};

Vector gaussian(std::mt19937_64& rng, std::size_t dim, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Vector v(dim);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

std::string synthetic_question(const std::string& relation) { return "which thing is " + relation + " of it"; }

SyntheticBenchmark gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n_entities < 1 || spec.n_relations < 1 || spec.n_answers < 1 || spec.n_samples < 1 ||
      spec.feature_dim < 1 || spec.embedding_dim < 1 || spec.relations_per_entity < 1) {
    throw ContractError("synthetic spec counts must be at least 1");
  }
  if (spec.n_answers > spec.n_entities) throw ContractError("synthetic spec has more answers than entities");
  if (spec.noise < 0.0) throw ContractError("noise must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::vector<std::string> entities, relations;
  for (std::size_t i = 0; i < spec.n_entities; ++i) entities.push_back(numbered("ent", i, spec.n_entities));
  for (std::size_t i = 0; i < spec.n_relations; ++i) relations.push_back(numbered("rel", i, spec.n_relations));

  // Answers are the first n_answers entities; support entities are the rest,
  // or every entity when there is no rest.
  const std::size_t first_support = spec.n_entities > spec.n_answers ? spec.n_answers : 0;

  SyntheticBenchmark out;
  // (entity, relation) pairs where the entity sits at the head / tail.
  std::set<std::pair<std::size_t, std::size_t>> heads, tails;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> facts_of(spec.n_entities);  // (relation, answer)
  std::uniform_int_distribution<std::size_t> pick_answer(0, spec.n_answers - 1);
  const std::size_t per_entity = std::min(spec.relations_per_entity, spec.n_relations);
  for (std::size_t e = first_support; e < spec.n_entities; ++e) {
    std::vector<std::size_t> rels(spec.n_relations);
    for (std::size_t r = 0; r < rels.size(); ++r) rels[r] = r;
    std::shuffle(rels.begin(), rels.end(), rng);
    for (std::size_t k = 0; k < per_entity; ++k) {
      const std::size_t r = rels[k];
      if (tails.contains({e, r})) continue;
      for (int attempt = 0; attempt < 64; ++attempt) {
        const std::size_t a = pick_answer(rng);
        if (a == e || heads.contains({a, r})) continue;
        heads.insert({e, r});
        tails.insert({a, r});
        facts_of[e].push_back({r, a});
        out.kg.insert({entities[e], relations[r], entities[a]});
        break;
      }
    }
  }

  std::vector<std::size_t> supports;
  for (std::size_t e = first_support; e < spec.n_entities; ++e) {
    if (!facts_of[e].empty()) supports.push_back(e);
  }
  if (supports.empty()) throw ContractError("synthetic spec admits no facts");

  const double proto_sd = 1.0 / std::sqrt(static_cast<double>(spec.feature_dim));
  std::vector<Vector> prototypes(spec.n_entities);
  for (auto& p : prototypes) p = gaussian(rng, spec.feature_dim, proto_sd);

  auto features = std::make_shared<FeatureTable>(spec.feature_dim);
  const std::size_t n_images = spec.n_images != 0 ? spec.n_images : std::max<std::size_t>(1, spec.n_samples / 2);
  std::vector<std::size_t> image_entity(n_images);
  std::uniform_int_distribution<std::size_t> pick_support(0, supports.size() - 1);
  for (std::size_t i = 0; i < n_images; ++i) {
    const std::size_t e = supports[pick_support(rng)];
    image_entity[i] = e;
    Vector f = gaussian(rng, spec.feature_dim, spec.noise * proto_sd);
    for (std::size_t d = 0; d < f.size(); ++d) f[d] += prototypes[e][d];
    features->add(numbered("img", i, n_images), std::move(f));
  }
  out.dataset.features = features;

  std::uniform_int_distribution<std::size_t> pick_image(0, n_images - 1);
  for (std::size_t s = 0; s < spec.n_samples; ++s) {
    const std::size_t img = pick_image(rng);
    const std::size_t e = image_entity[img];
    std::uniform_int_distribution<std::size_t> pick_fact(0, facts_of[e].size() - 1);
    const auto [r, a] = facts_of[e][pick_fact(rng)];
    Sample sample;
    sample.id = numbered("q", s, spec.n_samples);
    sample.image_feature_id = numbered("img", img, n_images);
    sample.question = synthetic_question(relations[r]);
    sample.answer = entities[a];
    sample.fact = Triple{entities[e], relations[r], entities[a]};
    out.dataset.samples.push_back(std::move(sample));
  }

  const double emb_sd = 1.0 / std::sqrt(static_cast<double>(spec.embedding_dim));
  out.embeddings = EmbeddingTable(spec.embedding_dim);
  for (const char* w : kTemplateWords) out.embeddings.add(w, gaussian(rng, spec.embedding_dim, emb_sd));
  for (const auto& r : relations) out.embeddings.add(r, gaussian(rng, spec.embedding_dim, emb_sd));
  for (const auto& e : entities) out.embeddings.add(e, gaussian(rng, spec.embedding_dim, emb_sd));
  return out;
}

}  // namespace zskg
