#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "zskg/data.hpp"
#include "zskg/error.hpp"
#include "zskg/pipeline.hpp"
#include "zskg/spaces.hpp"

using namespace zskg;

namespace {

// Hand-rolled forward pass: tanh on hidden layers, identity on the last.
Vector reference_forward(const FusionModel& m, const Vector& x) {
  Vector a = x;
  const auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weight;
    Vector z(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      long double s = layers[l].bias[r];
      for (std::size_t c = 0; c < w.cols(); ++c) s += static_cast<long double>(w(r, c)) * a[c];
      z[r] = static_cast<double>(s);
      if (l + 1 < layers.size()) z[r] = std::tanh(z[r]);
    }
    a = std::move(z);
  }
  return a;
}

// High-precision softmax of raw dot products over tau.
std::vector<long double> reference_probs(const SpaceModel& s, const Vector& fused, const std::vector<std::string>& cands,
                                         long double tau) {
  std::vector<long double> z;
  for (const auto& c : cands) {
    const auto g = s.target_vector(c);
    long double d = 0;
    for (std::size_t i = 0; i < g.size(); ++i) d += static_cast<long double>(g[i]) * fused[i];
    z.push_back(d / tau);
  }
  const long double mx = *std::max_element(z.begin(), z.end());
  long double sum = 0;
  for (auto& v : z) sum += (v = std::exp(v - mx));
  for (auto& v : z) v /= sum;
  return z;
}

std::vector<TrainingExample> random_batch(std::mt19937_64& rng, const SpaceModel& s, std::size_t n,
                                          const std::vector<std::string>& cands) {
  std::vector<TrainingExample> b;
  for (std::size_t i = 0; i < n; ++i) b.push_back({test::random_vector(rng, s.input_dim()), cands[rng() % cands.size()]});
  return b;
}

double max_abs(const SpaceParameters& p) {
  double m = 0;
  for (auto blk : p.blocks()) {
    for (double x : blk) m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

TEST_SUITE("spaces") {
  TEST_CASE("fuse: identity layer returns the concatenation") {
    FusionModel m({5, 5});
    for (std::size_t i = 0; i < 5; ++i) m.layers()[0].weight(i, i) = 1.0;
    const Vector img{1, 2, 3}, q{-4, 5};
    CHECK(fuse(m, img, q) == Vector{1, 2, 3, -4, 5});
  }

  TEST_CASE("fuse: zero weights return the bias") {
    FusionModel m({4, 3});
    m.layers()[0].bias = {0.5, -1, 2};
    CHECK(fuse(m, Vector{9, 9}, Vector{7, 7}) == Vector{0.5, -1, 2});
  }

  TEST_CASE("fuse: random network matches the reference forward pass") {
    std::mt19937_64 rng(1);
    for (int round = 0; round < 20; ++round) {
      auto m = FusionModel::glorot({6, 9, 4}, rng);
      for (auto& l : m.layers()) l.bias = test::random_vector(rng, l.bias.size(), 0.1);
      const auto img = test::random_vector(rng, 4), q = test::random_vector(rng, 2);
      Vector x = img;
      x.insert(x.end(), q.begin(), q.end());
      const auto got = fuse(m, img, q), want = reference_forward(m, x);
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
    }
    auto m = FusionModel::glorot({6, 9, 4}, rng);
    CHECK_THROWS_AS(fuse(m, Vector(3), Vector(2)), ContractError);
  }

  TEST_CASE("glorot bounds") {
    std::mt19937_64 rng(2);
    const auto m = FusionModel::glorot({30, 20, 10}, rng);
    const double lim0 = std::sqrt(6.0 / 50.0), lim1 = std::sqrt(6.0 / 30.0);
    for (double w : m.layers()[0].weight.flat()) CHECK(std::abs(w) <= lim0);
    for (double w : m.layers()[1].weight.flat()) CHECK(std::abs(w) <= lim1);
    for (double b : m.layers()[0].bias) CHECK(b == 0.0);
  }

  TEST_CASE("pmc_prob examples") {
    Matrix same(3, 2);
    for (std::size_t r = 0; r < 3; ++r) same.row(r)[0] = 1.0;
    const auto shared = test::identity_space(SpaceKind::answer, {"a", "b", "c"}, same);
    const std::vector<std::string> abc{"a", "b", "c"};
    for (double p : pmc_prob(shared, Vector{0.3, 0.7}, abc, 0.01)) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-14));

    Matrix two(2, 2);
    two(0, 0) = 1;
    two(1, 1) = 1;
    const auto s2 = test::identity_space(SpaceKind::answer, {"a", "b"}, two);
    const std::vector<std::string> ab{"a", "b"};
    const auto p = pmc_prob(s2, Vector{0.4, 0.4}, ab, 0.01);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    const auto q = pmc_prob(s2, Vector{0.02, 0.0}, ab, 0.01);
    CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-14));

    const std::vector<std::string> missing{"a", "zzz"};
    try {
      pmc_prob(s2, Vector{0, 0}, missing, 0.01);
      FAIL("expected an error");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("zzz") != std::string::npos);
    }
  }

  TEST_CASE("pmc_prob matches the high-precision softmax") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
      const auto s = test::random_space(rng, 5, {6, 8, 4}, 3);
      const auto fused = s.fused(test::random_vector(rng, 6));
      const auto& cands = s.targets().tokens();
      const auto got = pmc_prob(s, fused, cands, 0.01);
      const auto want = reference_probs(s, fused, cands, 0.01L);
      CHECK(std::accumulate(got.begin(), got.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - static_cast<double>(want[i])) < 1e-12);
      // A lower temperature keeps the argmax.
      const auto cooler = pmc_prob(s, fused, cands, 0.001);
      CHECK(std::max_element(got.begin(), got.end()) - got.begin() ==
            std::max_element(cooler.begin(), cooler.end()) - cooler.begin());
    }
  }

  TEST_CASE("loss examples") {
    Matrix one(1, 2);
    one(0, 0) = 1;
    const auto single = test::identity_space(SpaceKind::answer, {"a"}, one);
    const std::vector<TrainingExample> b1{{Vector{0.2, 0.1}, "a"}};
    const std::vector<std::string> only_a{"a"};
    CHECK(loss(single, b1, only_a, 0.01) == 0.0);

    Matrix same(4, 2, 0.5);
    const auto uniform = test::identity_space(SpaceKind::answer, {"a", "b", "c", "d"}, same);
    const std::vector<std::string> four{"a", "b", "c", "d"};
    const std::vector<TrainingExample> b2{{Vector{0.2, -0.3}, "c"}};
    CHECK(loss(uniform, b2, four, 0.01) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    const std::vector<TrainingExample> bad{{Vector{0.2, -0.3}, "e"}};
    CHECK_THROWS_AS(loss(uniform, bad, four, 0.01), ContractError);
  }

  TEST_CASE("batch loss is the sum of per-sample losses") {
    std::mt19937_64 rng(4);
    const auto s = test::random_space(rng, 6, {5, 7, 4}, 3);
    const auto& cands = s.targets().tokens();
    for (int round = 0; round < 50; ++round) {
      const auto batch = random_batch(rng, s, 3, cands);
      long double sum = 0;
      for (const auto& ex : batch) {
        const auto p = reference_probs(s, s.fused(ex.input), cands, 0.01L);
        const auto g = std::find(cands.begin(), cands.end(), ex.gold) - cands.begin();
        sum -= std::log(p[g]);
      }
      CHECK(loss(s, batch, cands, 0.01) == doctest::Approx(static_cast<double>(sum)).epsilon(1e-10));
      CHECK(grad(s, batch, cands, 0.01).loss == doctest::Approx(static_cast<double>(sum)).epsilon(1e-10));
    }
  }

  TEST_CASE("gradient: single candidate optimum is zero") {
    std::mt19937_64 rng(5);
    const auto s = test::random_space(rng, 1, {4, 5, 3}, 2);
    const std::vector<std::string> c{s.targets().tokens()[0]};
    const auto batch = random_batch(rng, s, 4, c);
    CHECK(max_abs(grad(s, batch, c, 0.01).gradient) == 0.0);
  }

  TEST_CASE("gradient: duplicating the batch doubles it") {
    std::mt19937_64 rng(6);
    const auto s = test::random_space(rng, 5, {4, 6, 3}, 3);
    const auto& c = s.targets().tokens();
    auto batch = random_batch(rng, s, 3, c);
    const auto g1 = grad(s, batch, c, 0.1);
    const auto copy = batch;
    batch.insert(batch.end(), copy.begin(), copy.end());
    const auto g2 = grad(s, batch, c, 0.1);
    auto b1 = g1.gradient.blocks();
    auto b2 = g2.gradient.blocks();
    for (std::size_t b = 0; b < b1.size(); ++b) {
      for (std::size_t i = 0; i < b1[b].size(); ++i) CHECK(b2[b][i] == doctest::Approx(2 * b1[b][i]).epsilon(1e-12));
    }
  }

  TEST_CASE("gradient: central differences on every parameter") {
    std::mt19937_64 rng(7);
    const double h = 1e-5;
    int checked = 0;
    for (bool projection : {true, false}) {
      auto s = test::random_space(rng, 4, {3, 5, 4}, 3, projection);
      const auto& c = s.targets().tokens();
      const auto batch = random_batch(rng, s, 2, c);
      const double tau = 0.5;
      const auto g = grad(s, batch, c, tau);
      auto params = s.params().blocks();
      auto grads = g.gradient.blocks();
      for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i) {
          const double orig = params[b][i];
          params[b][i] = orig + h;
          const double up = loss(s, batch, c, tau);
          params[b][i] = orig - h;
          const double down = loss(s, batch, c, tau);
          params[b][i] = orig;
          const double fd = (up - down) / (2 * h);
          CHECK(std::abs(fd - grads[b][i]) <= 1e-4 * std::max({1e-3, std::abs(fd), std::abs(grads[b][i])}));
          ++checked;
        }
      }
    }
    CHECK(checked >= 100);
  }

  TEST_CASE("learning-rate schedule") {
    TrainConfig c;
    CHECK(lr_schedule(c, 0) == 1.25e-3);
    CHECK(lr_schedule(c, 6) == doctest::Approx(8.75e-3).epsilon(1e-15));
    CHECK(lr_schedule(c, 10) == lr_schedule(c, 6));
    CHECK(lr_schedule(c, 13) == lr_schedule(c, 6));
    CHECK(lr_schedule(c, 14) == lr_schedule(c, 6) * 0.7);
    CHECK(lr_schedule(c, 16) == lr_schedule(c, 14));
    CHECK(lr_schedule(c, 17) == lr_schedule(c, 14) * 0.7);
    CHECK(lr_schedule(c, 48) == lr_schedule(c, 47));
    CHECK(lr_schedule(c, 500) == lr_schedule(c, 47));
    for (int e = 0; e < 6; ++e) CHECK(lr_schedule(c, e) < lr_schedule(c, e + 1));
    for (int e = 13; e < 60; ++e) CHECK(lr_schedule(c, e + 1) <= lr_schedule(c, e));
    CHECK_THROWS_AS(lr_schedule(c, -1), ContractError);
  }

  TEST_CASE("train config validation") {
    TrainConfig c;
    c.tau = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = {};
    c.patience = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
  }

  TEST_CASE("training memorizes one sample") {
    std::mt19937_64 rng(8);
    auto s = test::random_space(rng, 2, {4, 8, 3}, 3);
    const auto x = test::random_vector(rng, 4);
    // Gold is the currently losing token.
    const auto order = predict_unmasked(s, s.fused(x), s.targets().tokens());
    const std::vector<TrainingExample> ex{{x, order.back().token}};
    TrainConfig c;
    c.epochs = 60;
    c.patience = 60;
    c.holdout_fraction = 0.0;
    const auto log = train_space(s, ex, s.targets().tokens(), c);
    CHECK(loss(s, ex, s.targets().tokens(), c.tau) < 0.01);
    CHECK(log.best_holdout_loss < log.initial_holdout_loss);
  }

  TEST_CASE("training on synthetic data lowers held-out loss and is deterministic") {
    SyntheticSpec spec;
    spec.n_entities = 60;
    spec.n_answers = 30;
    spec.n_relations = 5;
    spec.n_samples = 400;
    spec.feature_dim = 16;
    spec.embedding_dim = 12;
    const auto bench = gen_synthetic(spec);
    const auto split = zero_shot_split(bench.dataset, top_k_answers(bench.dataset, 500), 1, 1).front();
    Lexicon lex;
    const Resources res{bench.kg, bench.embeddings, lex};
    TrainConfig c;
    c.epochs = 8;
    c.shape.common_dim = 16;
    c.shape.hidden_dim = 24;
    const auto a = train_models(split, res, c);
    const auto b = train_models(split, res, c);
    for (const auto& log : a.logs) CHECK(log.best_holdout_loss < log.initial_holdout_loss);
    CHECK(a.models.answer == b.models.answer);
    CHECK(a.models.relation == b.models.relation);
    CHECK(a.models.entity == b.models.entity);
    CHECK_THROWS_AS(train_models(DatasetSplit{}, res, c), ContractError);
  }

  TEST_CASE("training one space leaves the others untouched") {
    std::mt19937_64 rng(9);
    auto answer = test::random_space(rng, 4, {4, 6, 3}, 3);
    auto relation = test::random_space(rng, 4, {4, 6, 3}, 3);
    auto entity = test::random_space(rng, 4, {4, 6, 3}, 3);
    const auto answer0 = answer, entity0 = entity, relation0 = relation;
    TrainConfig c;
    c.epochs = 5;
    train_space(relation, random_batch(rng, relation, 20, relation.targets().tokens()), relation.targets().tokens(), c);
    CHECK(answer == answer0);
    CHECK(entity == entity0);
    CHECK_FALSE(relation == relation0);
  }

  TEST_CASE("predict_unmasked") {
    // Unit-norm distinct targets: the self-similar candidate wins.
    Matrix eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    const auto s = test::identity_space(SpaceKind::answer, {"a", "b", "c", "d"}, eye);
    const std::vector<std::string> cands{"d", "b", "a", "c"};
    CHECK(predict_unmasked(s, Vector{0, 0, 1, 0}, cands).front().token == "c");

    // Ties resolve lexicographically.
    const auto tied = predict_unmasked(s, Vector{0, 0, 0, 0}, cands);
    CHECK(tied[0].token == "a");
    CHECK(tied[3].token == "d");

    std::mt19937_64 rng(10);
    for (int round = 0; round < 200; ++round) {
      const auto rs = test::random_space(rng, 7, {5, 6, 4}, 3);
      const auto fused = rs.fused(test::random_vector(rng, 5));
      auto order = rs.targets().tokens();
      const auto ranked = predict_unmasked(rs, fused, order);
      std::shuffle(order.begin(), order.end(), rng);
      const auto ranked2 = predict_unmasked(rs, fused, order);
      REQUIRE(ranked.size() == ranked2.size());
      for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i].token == ranked2[i].token);

      // Brute-force argmax over explicit target vectors.
      std::string best;
      double best_score = -1e300;
      for (const auto& t : order) {
        const auto g = rs.target_vector(t);
        double d = 0;
        for (std::size_t i = 0; i < g.size(); ++i) d += g[i] * fused[i];
        if (d > best_score || (d == best_score && t < best)) best = t, best_score = d;
      }
      CHECK(ranked.front().token == best);

      // Probabilities follow the same order.
      std::vector<std::string> ranked_tokens;
      for (const auto& r : ranked) ranked_tokens.push_back(r.token);
      const auto p = pmc_prob(rs, fused, ranked_tokens, 0.01);
      for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i - 1] >= p[i]);
    }
  }
}
