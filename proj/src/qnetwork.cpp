#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "sfcsim/error.hpp"
#include "sfcsim/qnetwork.hpp"

namespace sfcsim {

namespace {

constexpr char kMagic[8] = {'S', 'F', 'C', 'Q', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void affine(const std::vector<double>& params, const QNetwork::Dense& layer,
            std::span<const double> x, std::vector<double>& y) {
  y.assign(layer.out, 0.0);
  const double* w = params.data() + layer.weights;
  const double* b = params.data() + layer.bias;
  for (int o = 0; o < layer.out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * layer.in;
    double acc = b[o];
    for (int i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void relu_inplace(std::vector<double>& v) {
  for (auto& x : v) x = x > 0.0 ? x : 0.0;
}

// grad(W) += delta (x) input, grad(b) += delta; returns W^T delta when wanted.
void affine_backward(const std::vector<double>& params, const QNetwork::Dense& layer,
                     std::span<const double> input, std::span<const double> delta,
                     std::span<double> grad, std::vector<double>* dinput) {
  const double* w = params.data() + layer.weights;
  double* gw = grad.data() + layer.weights;
  double* gb = grad.data() + layer.bias;
  if (dinput) dinput->assign(layer.in, 0.0);
  for (int o = 0; o < layer.out; ++o) {
    const double d = delta[o];
    if (d == 0.0) continue;
    gb[o] += d;
    const std::size_t row = static_cast<std::size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) {
      gw[row + i] += d * input[i];
      if (dinput) (*dinput)[i] += w[row + i] * d;
    }
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}
  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::uint64_t get(int width) {
    if (!has(width)) throw ConfigError("weight file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  const unsigned char* cursor() const { return bytes_.data() + pos_; }

 private:
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void ModelConfig::validate() const {
  if (input_a <= 0 || input_b <= 0 || input_c <= 0 || branch_width <= 0 || action_count <= 0)
    throw ConfigError("model widths must be positive");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("hidden widths must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0, 1]");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0)
    throw ConfigError("epsilon bounds must be in [0, 1]");
  if (epsilon_decay <= 0.0 || epsilon_decay > 1.0) throw ConfigError("epsilon decay must be in (0, 1]");
  if (replay_capacity <= 0 || batch_size <= 0 || target_sync <= 0)
    throw ConfigError("replay capacity, batch size and target sync must be positive");
  if (batch_size > replay_capacity) throw ConfigError("batch size exceeds replay capacity");
}

std::uint64_t ModelConfig::shape_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(input_a);
  mix(input_b);
  mix(input_c);
  mix(branch_width);
  mix(static_cast<std::int64_t>(hidden.size()));
  for (int w : hidden) mix(w);
  mix(action_count);
  return h;
}

QNetwork::QNetwork(const ModelConfig& config) : config_(config) { build_layers(); }

void QNetwork::build_layers() {
  layers_.clear();
  std::size_t offset = 0;
  auto add = [&](int in, int out) {
    Dense d{in, out, offset, offset + static_cast<std::size_t>(in) * out};
    offset = d.bias + out;
    layers_.push_back(d);
  };
  const int f = config_.branch_width;
  add(config_.input_a, f);
  add(config_.input_b, f);
  add(config_.input_c, f);
  add(3 * f, 3 * f);  // attention scores
  int width = 3 * f;
  for (int h : config_.hidden) {
    add(width, h);
    width = h;
  }
  add(width, config_.action_count);
  params_.assign(offset, 0.0);
}

QNetwork QNetwork::initialized(const ModelConfig& config, std::uint64_t seed) {
  QNetwork net(config);
  Rng rng(seed);
  const std::size_t attention = 3;
  for (std::size_t li = 0; li < net.layers_.size(); ++li) {
    const auto& d = net.layers_[li];
    // He-uniform for ReLU layers; the attention layer starts near uniform
    // weights and the output layer starts small.
    double limit = std::sqrt(6.0 / d.in);
    if (li == attention) limit = 0.1 / std::sqrt(static_cast<double>(d.in));
    if (li + 1 == net.layers_.size()) limit = std::sqrt(1.0 / d.in);
    for (std::size_t i = 0; i < static_cast<std::size_t>(d.in) * d.out; ++i)
      net.params_[d.weights + i] = rng.uniform(-limit, limit);
  }
  return net;
}

void QNetwork::check_input(const StateEncoding& s) const {
  if (static_cast<int>(s.a.size()) != config_.input_a ||
      static_cast<int>(s.b.size()) != config_.input_b ||
      static_cast<int>(s.c.size()) != config_.input_c)
    throw std::invalid_argument("state encoding does not match the network input sizes");
}

std::vector<double> QNetwork::forward(const StateEncoding& s) const {
  Cache cache;
  return forward(s, cache);
}

std::vector<double> QNetwork::forward(const StateEncoding& s, Cache& cache) const {
  check_input(s);
  const int f = config_.branch_width;
  const std::vector<double>* inputs[3] = {&s.a, &s.b, &s.c};
  cache.concat.assign(3 * f, 0.0);
  for (int i = 0; i < 3; ++i) {
    affine(params_, layers_[i], *inputs[i], cache.branch_out[i]);
    relu_inplace(cache.branch_out[i]);
    std::copy(cache.branch_out[i].begin(), cache.branch_out[i].end(), cache.concat.begin() + i * f);
  }

  std::vector<double> scores;
  affine(params_, layers_[3], cache.concat, scores);
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  cache.attention.resize(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    cache.attention[j] = std::exp(scores[j] - top);
    total += cache.attention[j];
  }
  const double positions = static_cast<double>(scores.size());
  cache.attended.resize(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    cache.attention[j] /= total;
    cache.attended[j] = cache.concat[j] * positions * cache.attention[j];
  }

  const std::size_t hidden_count = config_.hidden.size();
  cache.hidden.resize(hidden_count);
  const std::vector<double>* h = &cache.attended;
  for (std::size_t k = 0; k < hidden_count; ++k) {
    affine(params_, layers_[4 + k], *h, cache.hidden[k]);
    relu_inplace(cache.hidden[k]);
    h = &cache.hidden[k];
  }
  affine(params_, layers_.back(), *h, cache.q);
  return cache.q;
}

void QNetwork::backward(const Cache& cache, const StateEncoding& s, std::span<const double> dq,
                        std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
  const std::size_t hidden_count = config_.hidden.size();

  std::vector<double> delta(dq.begin(), dq.end());
  std::vector<double> dinput;
  for (std::size_t k = hidden_count + 1; k-- > 0;) {
    const auto& layer = layers_[4 + k];
    const std::vector<double>& input = k == 0 ? cache.attended : cache.hidden[k - 1];
    affine_backward(params_, layer, input, delta, grad, &dinput);
    delta.swap(dinput);
    if (k > 0) {
      const auto& act = cache.hidden[k - 1];
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (act[i] <= 0.0) delta[i] = 0.0;
    }
  }

  // Attention: attended_j = concat_j * P * a_j with a = softmax(W concat + b).
  const std::size_t p = cache.concat.size();
  const double positions = static_cast<double>(p);
  std::vector<double> dconcat(p);
  std::vector<double> dweights(p);
  double weighted = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    dconcat[j] = delta[j] * positions * cache.attention[j];
    dweights[j] = delta[j] * positions * cache.concat[j];
    weighted += cache.attention[j] * dweights[j];
  }
  std::vector<double> dscores(p);
  for (std::size_t j = 0; j < p; ++j) dscores[j] = cache.attention[j] * (dweights[j] - weighted);
  affine_backward(params_, layers_[3], cache.concat, dscores, grad, &dinput);
  for (std::size_t j = 0; j < p; ++j) dconcat[j] += dinput[j];

  const int f = config_.branch_width;
  const std::vector<double>* inputs[3] = {&s.a, &s.b, &s.c};
  std::vector<double> branch_delta(f);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < f; ++j)
      branch_delta[j] = cache.branch_out[i][j] > 0.0 ? dconcat[i * f + j] : 0.0;
    affine_backward(params_, layers_[i], *inputs[i], branch_delta, grad, nullptr);
  }
}

void QNetwork::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(layers_.size()));
    for (const auto& l : layers_) {
      put_u32(out, static_cast<std::uint32_t>(l.in));
      put_u32(out, static_cast<std::uint32_t>(l.out));
    }
    put_u64(out, config_.shape_hash());
    put_u64(out, params_.size());
    for (double v : params_) put_u64(out, std::bit_cast<std::uint64_t>(v));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

QNetwork QNetwork::load(const std::filesystem::path& path, const ModelConfig& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open weight file " + path.string());
  ByteReader reader(std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {}));

  if (!reader.has(sizeof kMagic) || std::memcmp(reader.cursor(), kMagic, sizeof kMagic) != 0)
    throw ConfigError("not a weight file (bad magic)");
  for (std::size_t i = 0; i < sizeof kMagic; ++i) reader.get(1);
  if (reader.get(4) != kFormatVersion) throw ConfigError("unsupported weight file version");

  QNetwork net(expected);
  const auto layer_count = reader.get(4);
  if (layer_count != net.layers_.size())
    throw ConfigError("weight file layer count does not match the model config");
  for (const auto& l : net.layers_) {
    const auto in_width = reader.get(4);
    const auto out_width = reader.get(4);
    if (in_width != static_cast<std::uint64_t>(l.in) || out_width != static_cast<std::uint64_t>(l.out))
      throw ConfigError("weight file layer shape does not match the model config");
  }
  if (reader.get(8) != expected.shape_hash())
    throw ConfigError("weight file config hash does not match the model config");
  if (reader.get(8) != net.params_.size()) throw ConfigError("weight file parameter count mismatch");
  std::vector<double> params(net.params_.size());
  for (auto& v : params) v = std::bit_cast<double>(reader.get(8));
  if (!reader.at_end()) throw ConfigError("weight file has trailing bytes");
  net.params_ = std::move(params);
  return net;
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

int act(const QNetwork& net, const StateEncoding& s, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0, 1]");
  const int actions = net.config().action_count;
  if (rng.uniform01() < epsilon) return static_cast<int>(rng.uniform_int(0, actions - 1));
  const auto q = net.forward(s);
  return argmax(q);
}

}  // namespace sfcsim
