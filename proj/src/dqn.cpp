#include <algorithm>
#include <unordered_map>
#include <stdexcept>

#include "sfcsim/qnetwork.hpp"

namespace sfcsim {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayMemory::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayMemory::sample(std::size_t n, Rng& rng) const {
  if (n > items_.size()) throw std::invalid_argument("sample larger than replay memory");
  // Partial Fisher-Yates over a sparse index map, so large memories stay cheap.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto lookup = [&](std::size_t i) {
    const auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(n);
  const std::size_t size = items_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(size - 1)));
    const std::size_t vi = lookup(i);
    const std::size_t vj = lookup(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

double td_loss(const QNetwork& online, const QNetwork& target,
               std::span<const Transition* const> batch, double gamma, std::vector<double>* grad) {
  if (batch.empty()) return 0.0;
  if (grad) grad->assign(online.parameter_count(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  QNetwork::Cache cache;
  std::vector<double> dq(online.config().action_count, 0.0);
  for (const Transition* t : batch) {
    double y = t->reward;
    if (!t->terminal) {
      const auto next_q = target.forward(t->next);
      y += gamma * *std::max_element(next_q.begin(), next_q.end());
    }
    const auto q = online.forward(t->state, cache);
    const double diff = q.at(t->action) - y;
    loss += diff * diff * scale;
    if (grad) {
      std::fill(dq.begin(), dq.end(), 0.0);
      dq[t->action] = 2.0 * diff * scale;
      online.backward(cache, t->state, dq, *grad);
    }
  }
  return loss;
}

DqnLearner::DqnLearner(const ModelConfig& config, std::uint64_t seed)
    : DqnLearner(QNetwork::initialized(config, seed)) {}

DqnLearner::DqnLearner(QNetwork initial)
    : online_(std::move(initial)),
      target_(online_),
      velocity_(online_.parameter_count(), 0.0) {}

std::optional<double> DqnLearner::update(const ReplayMemory& memory, Rng& rng) {
  const auto& cfg = config();
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  if (memory.size() < batch_size) return std::nullopt;
  const auto picks = memory.sample(batch_size, rng);
  std::vector<const Transition*> batch;
  batch.reserve(picks.size());
  for (auto i : picks) batch.push_back(&memory.at(i));

  std::vector<double> grad;
  const double loss = td_loss(online_, target(), batch, cfg.gamma, &grad);
  auto params = online_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = cfg.momentum * velocity_[i] - cfg.learning_rate * grad[i];
    params[i] += velocity_[i];
  }
  ++updates_;
  if (cfg.use_target && updates_ % cfg.target_sync == 0) target_ = online_;
  return loss;
}

}  // namespace sfcsim
