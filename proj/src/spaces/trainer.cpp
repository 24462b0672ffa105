#include <algorithm>
#include <cmath>
#include <numeric>

#include "zskg/error.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

void TrainConfig::validate() const {
  if (!(tau > 0.0)) throw ContractError("tau must be positive");
  if (batch_size < 1) throw ContractError("batch size must be at least 1");
  if (patience < 1) throw ContractError("patience must be at least 1");
  if (epochs < 0) throw ContractError("epochs must be non-negative");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) throw ContractError("hold-out fraction must be in [0, 1)");
  if (schedule.decay_every < 1) throw ContractError("decay interval must be at least 1");
}

double lr_schedule(const TrainConfig& config, int epoch) {
  if (epoch < 0) throw ContractError("epoch must be non-negative");
  const auto& s = config.schedule;
  const int warm = std::min(epoch, s.warmup_epochs - 1);
  double lr = s.warmup_factor * static_cast<double>(warm + 1) * s.base;
  if (epoch < s.decay_start) return lr;
  // One decay step at decay_start, then another every decay_every epochs,
  // frozen after decay_end.
  const int last = std::min(epoch, s.decay_end);
  const int steps = (last - s.decay_start) / s.decay_every + 1;
  for (int i = 0; i < steps; ++i) lr *= s.decay_rate;
  return lr;
}

AdamState::AdamState(const SpaceParameters& like) : m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamState::step(SpaceParameters& params, const SpaceParameters& gradient, double lr, const AdamConfig& config) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
  auto p = params.blocks();
  auto g = gradient.blocks();
  auto m = m_.blocks();
  auto v = v_.blocks();
  for (std::size_t b = 0; b < p.size(); ++b) {
    for (std::size_t i = 0; i < p[b].size(); ++i) {
      const double gi = g[b][i];
      m[b][i] = config.beta1 * m[b][i] + (1.0 - config.beta1) * gi;
      v[b][i] = config.beta2 * v[b][i] + (1.0 - config.beta2) * gi * gi;
      const double mhat = m[b][i] / bc1;
      const double vhat = v[b][i] / bc2;
      p[b][i] -= lr * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

namespace {

std::uint64_t kind_salt(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::answer: return 0x9e3779b97f4a7c15ULL;
    case SpaceKind::relation: return 0xbf58476d1ce4e5b9ULL;
    case SpaceKind::entity: return 0x94d049bb133111ebULL;
  }
  return 0;
}

double mean_loss(const SpaceModel& space, std::span<const TrainingExample> examples,
                 std::span<const std::string> candidates, double tau) {
  if (examples.empty()) return 0.0;
  return loss(space, examples, candidates, tau) / static_cast<double>(examples.size());
}

}  // namespace

SpaceTrainLog train_space(SpaceModel& space, std::vector<TrainingExample> examples,
                          const std::vector<std::string>& candidates, const TrainConfig& config) {
  config.validate();
  SpaceTrainLog log;
  log.kind = space.kind();

  std::vector<std::string> usable;
  for (const auto& c : candidates) {
    if (space.targets().contains(c)) usable.push_back(c);
  }
  std::sort(usable.begin(), usable.end());
  usable.erase(std::unique(usable.begin(), usable.end()), usable.end());
  const std::size_t before = examples.size();
  std::erase_if(examples, [&](const TrainingExample& ex) {
    return !std::binary_search(usable.begin(), usable.end(), ex.gold);
  });
  log.skipped = before - examples.size();
  if (examples.empty()) throw ContractError("no training examples for the " + std::string(to_string(space.kind())) + " space");
  log.examples = examples.size();

  std::mt19937_64 rng(config.seed ^ kind_salt(space.kind()));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_holdout = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(order.size())));
  std::vector<TrainingExample> holdout;
  std::vector<TrainingExample> fit;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_holdout ? holdout : fit).push_back(std::move(examples[order[i]]));
  }
  // Tiny datasets monitor the training loss instead.
  const std::vector<TrainingExample>& monitor = holdout.empty() ? fit : holdout;

  AdamState adam(space.params());
  log.initial_holdout_loss = mean_loss(space, monitor, usable, config.tau);
  log.best_holdout_loss = log.initial_holdout_loss;
  SpaceParameters best = space.params();
  int bad_epochs = 0;

  std::vector<std::size_t> fit_order(fit.size());
  std::iota(fit_order.begin(), fit_order.end(), 0);
  std::vector<TrainingExample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(config, epoch);
    std::shuffle(fit_order.begin(), fit_order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < fit_order.size(); start += config.batch_size) {
      const std::size_t end = std::min(fit_order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(fit[fit_order[i]]);
      auto lg = grad(space, batch, usable, config.tau);
      epoch_loss += lg.loss;
      adam.step(space.params(), lg.gradient, lr, config.adam);
    }
    EpochLog e{epoch, lr, epoch_loss / static_cast<double>(fit.size()), mean_loss(space, monitor, usable, config.tau)};
    log.epochs.push_back(e);
    if (e.holdout_loss < log.best_holdout_loss) {
      log.best_holdout_loss = e.holdout_loss;
      log.best_epoch = epoch;
      best = space.params();
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
  }
  space.params() = std::move(best);
  return log;
}

}  // namespace zskg
