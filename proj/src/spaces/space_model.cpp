#include <algorithm>
#include <cmath>
#include <numeric>

#include "zskg/error.hpp"
#include "zskg/kernels.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::answer: return "answer";
    case SpaceKind::relation: return "relation";
    case SpaceKind::entity: return "entity";
  }
  return "?";
}

SpaceKind space_kind_from_string(std::string_view name) {
  if (name == "answer") return SpaceKind::answer;
  if (name == "relation") return SpaceKind::relation;
  if (name == "entity") return SpaceKind::entity;
  throw ContractError("unknown space kind '" + std::string(name) + "'");
}

TargetTable::TargetTable(std::vector<std::string> tokens, Matrix inputs)
    : tokens_(std::move(tokens)), inputs_(std::move(inputs)) {
  if (tokens_.size() != inputs_.rows()) throw ContractError("target table token/row count mismatch");
  if (!std::is_sorted(tokens_.begin(), tokens_.end())) throw ContractError("target tokens must be sorted");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw ContractError("duplicate target token '" + tokens_[i] + "'");
  }
}

std::size_t TargetTable::row_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw ContractError("no target vector for '" + token + "'");
  return it->second;
}

std::vector<std::span<double>> SpaceParameters::blocks() {
  std::vector<std::span<double>> out;
  for (auto& layer : fusion.layers()) {
    out.push_back(layer.weight.flat());
    out.push_back(layer.bias);
  }
  if (projection.size() != 0) out.push_back(projection.flat());
  return out;
}

std::vector<std::span<const double>> SpaceParameters::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& layer : fusion.layers()) {
    out.push_back(layer.weight.flat());
    out.push_back(layer.bias);
  }
  if (projection.size() != 0) out.push_back(projection.flat());
  return out;
}

SpaceParameters SpaceParameters::zeros_like() const {
  return {FusionModel(fusion.layer_dims()), Matrix(projection.rows(), projection.cols())};
}

std::size_t SpaceParameters::parameter_count() const {
  std::size_t n = 0;
  for (auto b : blocks()) n += b.size();
  return n;
}

SpaceModel::SpaceModel(SpaceKind kind, SpaceParameters params, TargetTable targets)
    : kind_(kind), params_(std::move(params)), targets_(std::move(targets)) {
  const std::size_t common = params_.fusion.output_dim();
  if (has_projection()) {
    if (params_.projection.rows() != common || params_.projection.cols() != targets_.dim()) {
      throw ContractError("projection must be common_dim x embedding_dim");
    }
  } else if (targets_.size() > 0 && targets_.dim() != common) {
    throw ContractError("without a projection the embedding dim must equal the common dim");
  }
}

SpaceModel SpaceModel::create(SpaceKind kind, const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              const Lexicon& lexicon, const SpaceShape& shape, std::mt19937_64& rng,
                              std::vector<std::string>* skipped) {
  std::vector<std::string> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::string> kept;
  std::vector<double> rows;
  for (const auto& tok : sorted) {
    auto pv = phrase_vector(table, tok, lexicon);
    if (pv.out_of_vocabulary) {
      if (skipped != nullptr) skipped->push_back(tok);
      continue;
    }
    kept.push_back(tok);
    rows.insert(rows.end(), pv.values.begin(), pv.values.end());
  }
  Matrix inputs(kept.size(), table.dim());
  std::copy(rows.begin(), rows.end(), inputs.flat().begin());

  SpaceParameters params;
  params.fusion = FusionModel::glorot({shape.input_dim, shape.hidden_dim, shape.common_dim}, rng);
  if (shape.projection) {
    params.projection = Matrix(shape.common_dim, table.dim());
    const double limit = std::sqrt(6.0 / static_cast<double>(shape.common_dim + table.dim()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : params.projection.flat()) w = dist(rng);
  }
  return SpaceModel(kind, std::move(params), TargetTable(std::move(kept), std::move(inputs)));
}

Vector SpaceModel::query(std::span<const double> fused) const {
  if (fused.size() != common_dim()) throw ContractError("fused vector has the wrong dim");
  if (!has_projection()) return Vector(fused.begin(), fused.end());
  Vector u(targets_.dim(), 0.0);
  kernels::gemv_transposed_acc(params_.projection, fused, u);
  return u;
}

Vector SpaceModel::target_vector(const std::string& token) const {
  auto row = targets_.inputs().row(targets_.row_of(token));
  if (!has_projection()) return Vector(row.begin(), row.end());
  Vector out(common_dim());
  kernels::gemv(params_.projection, row, out);
  return out;
}

Vector SpaceModel::similarities(std::span<const double> fused, std::span<const std::size_t> rows) const {
  const Vector u = query(fused);
  Vector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = kernels::dot(targets_.inputs().row(rows[i]), u);
  return out;
}

Vector SpaceModel::similarities_all(std::span<const double> fused) const {
  const Vector u = query(fused);
  Vector out(targets_.size());
  if (!out.empty()) kernels::gemv(targets_.inputs(), u, out);
  return out;
}

std::vector<std::size_t> SpaceModel::rows_of(std::span<const std::string> tokens) const {
  std::vector<std::size_t> rows;
  rows.reserve(tokens.size());
  for (const auto& t : tokens) rows.push_back(targets_.row_of(t));
  return rows;
}

namespace {

// In-place softmax of logits; returns log-sum-exp.
double softmax_inplace(Vector& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& x : z) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : z) x /= sum;
  return mx + std::log(sum);
}

void check_candidates(std::span<const std::string> candidates) {
  if (candidates.empty()) throw ContractError("candidate list is empty");
}

std::size_t gold_position(std::span<const std::string> candidates, const std::string& gold) {
  auto it = std::find(candidates.begin(), candidates.end(), gold);
  if (it == candidates.end()) throw ContractError("gold token '" + gold + "' is not among the candidates");
  return static_cast<std::size_t>(it - candidates.begin());
}

void check_tau(double tau) {
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");
}

}  // namespace

Vector pmc_prob(const SpaceModel& space, std::span<const double> fused, std::span<const std::string> candidates,
                double tau) {
  check_candidates(candidates);
  check_tau(tau);
  const auto rows = space.rows_of(candidates);
  Vector z = space.similarities(fused, rows);
  for (double& x : z) x /= tau;
  softmax_inplace(z);
  return z;
}

double loss(const SpaceModel& space, std::span<const TrainingExample> batch, std::span<const std::string> candidates,
            double tau) {
  check_candidates(candidates);
  check_tau(tau);
  const auto rows = space.rows_of(candidates);
  double total = 0.0;
  for (const auto& ex : batch) {
    const std::size_t g = gold_position(candidates, ex.gold);
    Vector z = space.similarities(space.fused(ex.input), rows);
    for (double& x : z) x /= tau;
    const double gold_logit = z[g];
    total += softmax_inplace(z) - gold_logit;
  }
  return total;
}

LossAndGradient grad(const SpaceModel& space, std::span<const TrainingExample> batch,
                     std::span<const std::string> candidates, double tau) {
  check_candidates(candidates);
  check_tau(tau);
  const auto rows = space.rows_of(candidates);
  const auto& params = space.params();
  const Matrix& inputs = space.targets().inputs();
  LossAndGradient out{0.0, params.zeros_like()};

  FusionModel::Trace trace;
  Vector v(inputs.cols());
  Vector dfused(space.common_dim());
  for (const auto& ex : batch) {
    const std::size_t g = gold_position(candidates, ex.gold);
    const Vector f = params.fusion.forward(ex.input, trace);
    Vector z = space.similarities(f, rows);
    for (double& x : z) x /= tau;
    const double gold_logit = z[g];
    out.loss += softmax_inplace(z) - gold_logit;

    // dLoss/dlogit_c = (p_c - y_c) / tau; v = sum_c of that times the target input.
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const double coef = (z[c] - (c == g ? 1.0 : 0.0)) / tau;
      if (coef != 0.0) kernels::axpy(coef, inputs.row(rows[c]), v);
    }
    if (space.has_projection()) {
      kernels::rank1_update(1.0, f, v, out.gradient.projection);
      kernels::gemv(params.projection, v, dfused);
    } else {
      dfused = v;
    }
    params.fusion.backward(trace, dfused, out.gradient.fusion);
  }
  return out;
}

std::vector<RankedToken> predict_unmasked(const SpaceModel& space, std::span<const double> fused,
                                          std::span<const std::string> candidates) {
  check_candidates(candidates);
  const auto rows = space.rows_of(candidates);
  const Vector scores = space.similarities(fused, rows);
  std::vector<RankedToken> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) out.push_back({candidates[i], scores[i]});
  std::sort(out.begin(), out.end(), [](const RankedToken& a, const RankedToken& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  return out;
}

}  // namespace zskg
