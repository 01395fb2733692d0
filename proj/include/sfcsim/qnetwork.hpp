#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sfcsim/rng.hpp"

namespace sfcsim {

struct ModelConfig {
  int input_a = 60;
  int input_b = 21;
  int input_c = 62;
  int branch_width = 32;
  std::vector<int> hidden{128, 64};
  int action_count = 13;

  double learning_rate = 1e-3;
  double momentum = 0.9;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay = 0.995;
  int replay_capacity = 50000;
  int batch_size = 64;
  int target_sync = 50;
  bool use_target = true;

  void validate() const;  // throws ConfigError
  // FNV-1a over the shape-defining fields only.
  std::uint64_t shape_hash() const;
};

// Three normalized input vectors: current-DC SFC summary, current-DC
// resources, cluster summary plus general-agent signals.
struct StateEncoding {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  friend bool operator==(const StateEncoding&, const StateEncoding&) = default;
};

// Multi-input Q-function: per-branch ReLU layers of equal width, concatenated,
// re-weighted by a softmax attention over the concatenated positions, then
// ReLU hidden layers and a linear output with one Q-value per action.
class QNetwork {
 public:
  struct Dense {
    int in = 0;
    int out = 0;
    std::size_t weights = 0;  // offset of the out x in row-major matrix
    std::size_t bias = 0;
  };

  // Intermediate activations kept for backpropagation.
  struct Cache {
    std::vector<double> branch_out[3];
    std::vector<double> concat;
    std::vector<double> attention;  // softmax weights
    std::vector<double> attended;
    std::vector<std::vector<double>> hidden;
    std::vector<double> q;
  };

  explicit QNetwork(const ModelConfig& config);  // all-zero parameters
  static QNetwork initialized(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }
  // Layer shapes in storage order: 3 branches, attention, hidden..., output.
  const std::vector<Dense>& layers() const { return layers_; }

  // Throws std::invalid_argument on dimension mismatch.
  std::vector<double> forward(const StateEncoding& s) const;
  std::vector<double> forward(const StateEncoding& s, Cache& cache) const;
  // Adds dLoss/dparams to `grad` given dLoss/dq for the cached pass.
  void backward(const Cache& cache, const StateEncoding& s, std::span<const double> dq,
                std::span<double> grad) const;

  void save(const std::filesystem::path& path) const;
  // Throws ConfigError if the file is unreadable, corrupt, or built for another shape.
  static QNetwork load(const std::filesystem::path& path, const ModelConfig& expected);

 private:
  void build_layers();
  void check_input(const StateEncoding& s) const;

  ModelConfig config_;
  std::vector<Dense> layers_;
  std::vector<double> params_;
};

// Epsilon-greedy: uniform with probability epsilon, else argmax (lowest index on ties).
int act(const QNetwork& net, const StateEncoding& s, double epsilon, Rng& rng);
int argmax(std::span<const double> values);

struct Transition {
  StateEncoding state;
  int action = 0;
  double reward = 0.0;
  StateEncoding next;
  bool terminal = false;
};

class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Uniform sample without replacement; requires size() >= n.
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;
  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

// Mean squared TD error over a batch and its gradient w.r.t. the online net.
// Targets use `target` (terminal transitions: y = r).
double td_loss(const QNetwork& online, const QNetwork& target,
               std::span<const Transition* const> batch, double gamma, std::vector<double>* grad);

class DqnLearner {
 public:
  DqnLearner(const ModelConfig& config, std::uint64_t seed);
  explicit DqnLearner(QNetwork initial);

  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return config().use_target ? target_ : online_; }
  const ModelConfig& config() const { return online_.config(); }
  long updates() const { return updates_; }

  // One SGD-with-momentum step on a random batch; nullopt when the memory
  // holds fewer transitions than a batch.
  std::optional<double> update(const ReplayMemory& memory, Rng& rng);

 private:
  QNetwork online_;
  QNetwork target_;
  std::vector<double> velocity_;
  long updates_ = 0;
};

}  // namespace sfcsim
