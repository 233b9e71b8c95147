// Copyright 2026 The Namecraft Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/cnn_internal.hpp"
#include "core/error.hpp"

namespace namecraft::cnn {

namespace {

constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + exp(v))
double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

void require_ids(const Layout& layout, std::span<const int> ids) {
  require(static_cast<int>(ids.size()) == layout.max_len, ErrorCode::kShapeMismatch,
          "encoded length " + std::to_string(ids.size()) + " != max_len " +
              std::to_string(layout.max_len));
  for (int id : ids) {
    require(id >= 0 && id < layout.vocab, ErrorCode::kShapeMismatch, "character id out of range");
  }
}

// Embedding lookup (with optional dropout) and the raw convolutions.
void embed_and_convolve(const CnnModel& m, std::span<const int> ids, ForwardCache& c, Rng* rng,
                        double drop_embed) {
  const Layout& l = m.layout;
  const auto E = static_cast<std::size_t>(l.embed_dim);
  const auto L = static_cast<std::size_t>(l.max_len);
  const double* P = m.params.data();
  c.ids.assign(ids.begin(), ids.end());
  c.x.assign(L * E, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    const double* row = P + l.embedding + static_cast<std::size_t>(ids[t]) * E;
    std::copy(row, row + E, c.x.begin() + static_cast<std::ptrdiff_t>(t * E));
  }
  if (rng && drop_embed > 0.0) {
    const double keep = 1.0 / (1.0 - drop_embed);
    c.embed_mask.resize(L * E);
    for (std::size_t i = 0; i < L * E; ++i) {
      c.embed_mask[i] = rng->uniform() < drop_embed ? 0.0 : keep;
      c.x[i] *= c.embed_mask[i];
    }
  } else {
    c.embed_mask.clear();
  }

  c.z.resize(l.convs.size());
  for (std::size_t b = 0; b < l.convs.size(); ++b) {
    const ConvBlock& blk = l.convs[b];
    const auto F = static_cast<std::size_t>(blk.filters);
    const auto T = static_cast<std::size_t>(l.positions(blk));
    auto& z = c.z[b];
    z.resize(T * F);
    const double* W = P + blk.weight;
    const double* bias = P + blk.bias;
    for (std::size_t t = 0; t < T; ++t) {
      double* zr = z.data() + t * F;
      std::copy(bias, bias + F, zr);
      for (std::size_t j = 0; j < static_cast<std::size_t>(blk.width); ++j) {
        const double* xr = c.x.data() + (t + j) * E;
        for (std::size_t e = 0; e < E; ++e) {
          const double xv = xr[e];
          if (xv == 0.0) continue;
          const double* wr = W + (j * E + e) * F;
          for (std::size_t f = 0; f < F; ++f) zr[f] += xv * wr[f];
        }
      }
    }
  }
}

// Batch-norm, activation, pooling, dropout, dense and output layers.
void finish_forward(const CnnModel& m, ForwardCache& c, std::span<const double> mean,
                    std::span<const double> var, Rng* rng, double drop) {
  const Layout& l = m.layout;
  const Activation act = m.config.activation;
  const double* P = m.params.data();
  const auto pooled_n = static_cast<std::size_t>(l.pooled);
  c.y.resize(l.convs.size());
  c.argmax.assign(pooled_n, 0);
  c.pooled.assign(pooled_n, 0.0);
  for (std::size_t b = 0; b < l.convs.size(); ++b) {
    const ConvBlock& blk = l.convs[b];
    const auto F = static_cast<std::size_t>(blk.filters);
    const auto T = static_cast<std::size_t>(l.positions(blk));
    auto& y = c.y[b];
    y = c.z[b];
    if (m.config.batch_norm) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t col = blk.pooled_offset + f;
        const double scale = P[blk.gamma + f] / std::sqrt(var[col] + detail::kBnEpsilon);
        const double shift = P[blk.beta + f] - mean[col] * scale;
        for (std::size_t t = 0; t < T; ++t) y[t * F + f] = y[t * F + f] * scale + shift;
      }
    }
    // The activations are monotone, so pooling the pre-activations picks the
    // same position.
    for (std::size_t f = 0; f < F; ++f) {
      std::size_t best = 0;
      for (std::size_t t = 1; t < T; ++t) {
        if (y[t * F + f] > y[best * F + f]) best = t;
      }
      c.argmax[blk.pooled_offset + f] = static_cast<int>(best);
      c.pooled[blk.pooled_offset + f] = apply_activation(act, y[best * F + f]);
    }
  }

  c.pooled_drop = c.pooled;
  if (rng && drop > 0.0) {
    const double keep = 1.0 / (1.0 - drop);
    c.pooled_mask.resize(pooled_n);
    for (std::size_t i = 0; i < pooled_n; ++i) {
      c.pooled_mask[i] = rng->uniform() < drop ? 0.0 : keep;
      c.pooled_drop[i] *= c.pooled_mask[i];
    }
  } else {
    c.pooled_mask.clear();
  }

  const std::vector<double>* out_in = &c.pooled_drop;
  if (l.dense_units > 0) {
    const auto H = static_cast<std::size_t>(l.dense_units);
    c.hidden_pre.assign(P + l.dense_b, P + l.dense_b + H);
    for (std::size_t p = 0; p < pooled_n; ++p) {
      const double v = c.pooled_drop[p];
      if (v == 0.0) continue;
      const double* wr = P + l.dense_w + p * H;
      for (std::size_t h = 0; h < H; ++h) c.hidden_pre[h] += v * wr[h];
    }
    c.hidden.resize(H);
    for (std::size_t h = 0; h < H; ++h) c.hidden[h] = sigmoid(c.hidden_pre[h]);
    out_in = &c.hidden;
  } else {
    c.hidden_pre.clear();
    c.hidden.clear();
  }

  const auto K = static_cast<std::size_t>(l.num_classes);
  c.logits.assign(P + l.out_b, P + l.out_b + K);
  for (std::size_t i = 0; i < out_in->size(); ++i) {
    const double v = (*out_in)[i];
    const double* wr = P + l.out_w + i * K;
    for (std::size_t k = 0; k < K; ++k) c.logits[k] += v * wr[k];
  }
  c.probs.resize(K);
  for (std::size_t k = 0; k < K; ++k) c.probs[k] = sigmoid(c.logits[k]);
}

std::uint64_t signature_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

void check_weights(std::span<const double> weights, std::size_t n) {
  require(weights.empty() || weights.size() == n, ErrorCode::kShapeMismatch,
          "one weight per example expected");
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kElu: return "elu";
    case Activation::kIdentity: return "identity";
  }
  return "tanh";
}

Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "elu") return Activation::kElu;
  if (s == "identity" || s == "linear") return Activation::kIdentity;
  fail(ErrorCode::kInvalidArgument, "unknown activation '" + std::string(s) + "'");
}

const char* init_name(Init i) { return i == Init::kHeUniform ? "he_uniform" : "glorot_uniform"; }

Init parse_init(std::string_view s) {
  if (s == "he_uniform" || s == "he") return Init::kHeUniform;
  if (s == "glorot_uniform" || s == "glorot") return Init::kGlorotUniform;
  fail(ErrorCode::kInvalidArgument, "unknown initializer '" + std::string(s) + "'");
}

std::string default_alphabet(const corpus::PreprocessConfig& cfg) {
  std::string a;
  for (char c = 'A'; c <= 'Z'; ++c) a.push_back(c);
  a.push_back(cfg.part_open);
  a.push_back(cfg.part_close);
  a.push_back(cfg.name_separator);
  return a;
}

CnnConfig CnnConfig::single_defaults() { return CnnConfig{}; }

CnnConfig CnnConfig::concat_defaults() {
  CnnConfig c;
  c.embed_dim = 30;
  c.filters = {239, 248, 100, 150, 150, 250, 200};
  c.activation = Activation::kElu;
  c.dense_units = 200;
  c.dropout_embed = 0.02;
  c.epochs = 60;
  c.min_learning_rate = 0.00027;
  c.patience = 3;
  c.init = Init::kGlorotUniform;
  return c;
}

void CnnConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kInvalidArgument, what); };
  check(!alphabet.empty(), "alphabet must not be empty");
  std::string sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  check(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "alphabet has duplicates");
  check(embed_dim > 0, "embed_dim must be positive");
  check(!kernel_sizes.empty(), "at least one kernel size is required");
  check(kernel_sizes.size() == filters.size(), "one filter count per kernel size");
  for (std::size_t i = 0; i < kernel_sizes.size(); ++i) {
    check(kernel_sizes[i] > 0, "kernel sizes must be positive");
    check(filters[i] > 0, "filter counts must be positive");
    if (max_len > 0) check(kernel_sizes[i] <= max_len, "kernel size exceeds max_len");
  }
  check(dense_units >= 0, "dense_units must be non-negative");
  check(dropout_embed >= 0.0 && dropout_embed < 1.0, "dropout_embed must be in [0, 1)");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  check(batch_size > 0, "batch_size must be positive");
  check(epochs > 0, "epochs must be positive");
  check(learning_rate > 0.0 && min_learning_rate > 0.0 && min_learning_rate <= learning_rate,
        "need 0 < min_learning_rate <= learning_rate");
  check(plateau_factor > 0.0 && plateau_factor < 1.0, "plateau factor must be in (0, 1)");
  check(patience >= 1, "patience must be at least 1");
}

Layout Layout::build(const CnnConfig& cfg, int num_classes) {
  require(cfg.max_len > 0, ErrorCode::kInvalidArgument, "max_len is not set");
  require(num_classes >= 1, ErrorCode::kInvalidArgument, "need at least one class");
  cfg.validate();
  Layout l;
  l.vocab = static_cast<int>(cfg.alphabet.size()) + 1;
  l.embed_dim = cfg.embed_dim;
  l.max_len = cfg.max_len;
  l.num_classes = num_classes;
  std::size_t at = 0;
  l.embedding = at;
  at += static_cast<std::size_t>(l.vocab) * static_cast<std::size_t>(l.embed_dim);
  std::size_t pooled = 0;
  for (std::size_t i = 0; i < cfg.kernel_sizes.size(); ++i) {
    ConvBlock b;
    b.width = cfg.kernel_sizes[i];
    b.filters = cfg.filters[i];
    const auto F = static_cast<std::size_t>(b.filters);
    b.weight = at;
    at += static_cast<std::size_t>(b.width) * static_cast<std::size_t>(l.embed_dim) * F;
    b.bias = at;
    at += F;
    if (cfg.batch_norm) {
      b.gamma = at;
      at += F;
      b.beta = at;
      at += F;
    } else {
      b.gamma = b.beta = kAbsent;
    }
    b.pooled_offset = pooled;
    pooled += F;
    l.convs.push_back(b);
  }
  l.pooled = static_cast<int>(pooled);
  l.dense_units = cfg.dense_units;
  if (l.dense_units > 0) {
    l.dense_w = at;
    at += pooled * static_cast<std::size_t>(l.dense_units);
    l.dense_b = at;
    at += static_cast<std::size_t>(l.dense_units);
    l.out_in = l.dense_units;
  } else {
    l.dense_w = l.dense_b = kAbsent;
    l.out_in = l.pooled;
  }
  l.out_w = at;
  at += static_cast<std::size_t>(l.out_in) * static_cast<std::size_t>(num_classes);
  l.out_b = at;
  at += static_cast<std::size_t>(num_classes);
  l.total = at;
  return l;
}

CnnModel CnnModel::zeros(const CnnConfig& config, std::vector<corpus::ClassLabel> classes) {
  CnnModel m;
  m.config = config;
  m.classes = std::move(classes);
  m.layout = Layout::build(config, static_cast<int>(m.classes.size()));
  m.params.assign(m.layout.total, 0.0);
  m.running_mean.assign(static_cast<std::size_t>(m.layout.pooled), 0.0);
  m.running_var.assign(static_cast<std::size_t>(m.layout.pooled), 1.0);
  return m;
}

void CnnModel::validate() const {
  const Layout expect = Layout::build(config, static_cast<int>(classes.size()));
  require(expect.total == layout.total && params.size() == layout.total, ErrorCode::kModelMismatch,
          "CNN parameter count does not match its configuration");
  require(running_mean.size() == static_cast<std::size_t>(layout.pooled) &&
              running_var.size() == static_cast<std::size_t>(layout.pooled),
          ErrorCode::kModelMismatch, "batch-norm statistics have the wrong length");
  for (double v : params) require(std::isfinite(v), ErrorCode::kModelMismatch, "non-finite CNN parameter");
  for (double v : running_mean) require(std::isfinite(v), ErrorCode::kModelMismatch, "non-finite running mean");
  for (double v : running_var) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kModelMismatch, "invalid running variance");
  }
  for (int e = 0; e < layout.embed_dim; ++e) {
    require(params[layout.embedding + static_cast<std::size_t>(e)] == 0.0, ErrorCode::kModelMismatch,
            "padding embedding row is not zero");
  }
}

std::vector<TensorSlice> tensor_slices(const Layout& l) {
  std::vector<TensorSlice> out;
  auto add = [&](std::string name, std::vector<int> shape, std::size_t offset) {
    std::size_t size = 1;
    for (int d : shape) size *= static_cast<std::size_t>(d);
    out.push_back({std::move(name), std::move(shape), offset, size});
  };
  add("embedding", {l.vocab, l.embed_dim}, l.embedding);
  for (const auto& b : l.convs) {
    const std::string p = "conv" + std::to_string(b.width) + ".";
    add(p + "kernel", {b.width, l.embed_dim, b.filters}, b.weight);
    add(p + "bias", {b.filters}, b.bias);
    if (b.gamma != kAbsent) {
      add(p + "bn_gamma", {b.filters}, b.gamma);
      add(p + "bn_beta", {b.filters}, b.beta);
    }
  }
  if (l.dense_units > 0) {
    add("dense.kernel", {l.pooled, l.dense_units}, l.dense_w);
    add("dense.bias", {l.dense_units}, l.dense_b);
  }
  add("output.kernel", {l.out_in, l.num_classes}, l.out_w);
  add("output.bias", {l.num_classes}, l.out_b);
  return out;
}

std::vector<int> encode(std::string_view name, const std::string& alphabet, int max_len) {
  require(static_cast<int>(name.size()) <= max_len, ErrorCode::kTooLong,
          "name of length " + std::to_string(name.size()) + " exceeds max_len " +
              std::to_string(max_len));
  std::vector<int> ids(static_cast<std::size_t>(max_len), 0);
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto pos = alphabet.find(name[i]);
    require(pos != std::string::npos, ErrorCode::kUnknownChar,
            std::string("character '") + name[i] + "' is not in the alphabet");
    ids[i] = static_cast<int>(pos) + 1;
  }
  return ids;
}

std::vector<int> encode_truncating(std::string_view name, const std::string& alphabet, int max_len,
                                   bool* truncated) {
  const bool cut = static_cast<int>(name.size()) > max_len;
  if (truncated) *truncated = cut;
  return encode(cut ? name.substr(0, static_cast<std::size_t>(max_len)) : name, alphabet, max_len);
}

double apply_activation(Activation a, double v) {
  switch (a) {
    case Activation::kTanh: return std::tanh(v);
    case Activation::kElu: return v > 0.0 ? v : std::expm1(v);
    case Activation::kIdentity: return v;
  }
  return v;
}

double activation_derivative(Activation a, double pre, double post) {
  switch (a) {
    case Activation::kTanh: return 1.0 - post * post;
    case Activation::kElu: return pre > 0.0 ? 1.0 : post + 1.0;
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

void forward(const CnnModel& model, std::span<const int> ids, ForwardCache& cache) {
  require_ids(model.layout, ids);
  embed_and_convolve(model, ids, cache, nullptr, 0.0);
  finish_forward(model, cache, model.running_mean, model.running_var, nullptr, 0.0);
}

std::vector<double> predict_proba(const CnnModel& model, std::string_view canonical, bool* truncated) {
  thread_local ForwardCache cache;
  const auto ids = encode_truncating(canonical, model.config.alphabet, model.layout.max_len, truncated);
  forward(model, ids, cache);
  std::vector<double> p = cache.probs;
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (sum > 0.0) {
    for (auto& v : p) v /= sum;
  } else {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
  }
  return p;
}

double example_loss(std::span<const double> logits, int label, double weight) {
  double loss = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    loss += static_cast<int>(k) == label ? softplus(-logits[k]) : softplus(logits[k]);
  }
  return weight * loss;
}

namespace detail {

PassResult batch_pass(const CnnModel& m, std::span<const std::vector<int>> ids,
                      std::span<const int> labels, const PassOptions& opt,
                      std::vector<ForwardCache>& caches, std::vector<double>* gradient) {
  const Layout& l = m.layout;
  const std::size_t B = ids.size();
  require(B > 0 && labels.size() == B, ErrorCode::kShapeMismatch, "batch and label sizes differ");
  check_weights(opt.weights, B);
  const auto pooled_n = static_cast<std::size_t>(l.pooled);
  const auto E = static_cast<std::size_t>(l.embed_dim);
  const bool bn = m.config.batch_norm;
  const Activation act = m.config.activation;
  const double* P = m.params.data();
  Rng* rng = opt.dropout_rng;
  caches.resize(B);

  for (std::size_t i = 0; i < B; ++i) {
    require_ids(l, ids[i]);
    embed_and_convolve(m, ids[i], caches[i], rng, m.config.dropout_embed);
  }

  PassResult res;
  std::span<const double> mean = m.running_mean;
  std::span<const double> var = m.running_var;
  if (opt.batch_stats && bn) {
    res.batch_mean.assign(pooled_n, 0.0);
    res.batch_var.assign(pooled_n, 0.0);
    for (const auto& blk : l.convs) {
      const auto F = static_cast<std::size_t>(blk.filters);
      const auto T = static_cast<std::size_t>(l.positions(blk));
      const std::size_t b = static_cast<std::size_t>(&blk - l.convs.data());
      const double count = static_cast<double>(B * T);
      for (std::size_t f = 0; f < F; ++f) {
        double s = 0.0;
        for (std::size_t i = 0; i < B; ++i)
          for (std::size_t t = 0; t < T; ++t) s += caches[i].z[b][t * F + f];
        const double mu = s / count;
        double ss = 0.0;
        for (std::size_t i = 0; i < B; ++i)
          for (std::size_t t = 0; t < T; ++t) {
            const double d = caches[i].z[b][t * F + f] - mu;
            ss += d * d;
          }
        res.batch_mean[blk.pooled_offset + f] = mu;
        res.batch_var[blk.pooled_offset + f] = ss / count;
      }
    }
    mean = res.batch_mean;
    var = res.batch_var;
  }

  const auto K = static_cast<std::size_t>(l.num_classes);
  std::uint64_t sig = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    finish_forward(m, caches[i], mean, var, rng, m.config.dropout);
    const double w = opt.weights.empty() ? 1.0 : opt.weights[i];
    total += example_loss(caches[i].logits, labels[i], w);
    for (int a : caches[i].argmax) sig = signature_mix(sig, static_cast<std::uint64_t>(a));
  }
  res.loss = total / static_cast<double>(B);
  res.argmax_signature = sig;
  if (!gradient) return res;

  std::vector<double>& G = *gradient;
  G.assign(l.total, 0.0);
  const double inv_b = 1.0 / static_cast<double>(B);
  const auto H = static_cast<std::size_t>(l.dense_units);
  const auto O = static_cast<std::size_t>(l.out_in);
  // Gradient reaching each pooled unit's argmax pre-activation, per example.
  std::vector<std::vector<double>> dy_top(B, std::vector<double>(pooled_n, 0.0));
  std::vector<double> dlogit(K), din(O), dhid(H), dpool(pooled_n);

  for (std::size_t i = 0; i < B; ++i) {
    const ForwardCache& c = caches[i];
    const double w = opt.weights.empty() ? 1.0 : opt.weights[i];
    for (std::size_t k = 0; k < K; ++k) {
      const double target = static_cast<int>(k) == labels[i] ? 1.0 : 0.0;
      dlogit[k] = w * (c.probs[k] - target) * inv_b;
    }
    const std::vector<double>& in = H > 0 ? c.hidden : c.pooled_drop;
    for (std::size_t o = 0; o < O; ++o) {
      double acc = 0.0;
      const double* wr = P + l.out_w + o * K;
      double* gr = G.data() + l.out_w + o * K;
      for (std::size_t k = 0; k < K; ++k) {
        gr[k] += in[o] * dlogit[k];
        acc += wr[k] * dlogit[k];
      }
      din[o] = acc;
    }
    for (std::size_t k = 0; k < K; ++k) G[l.out_b + k] += dlogit[k];

    if (H > 0) {
      for (std::size_t h = 0; h < H; ++h) {
        dhid[h] = din[h] * c.hidden[h] * (1.0 - c.hidden[h]);
        G[l.dense_b + h] += dhid[h];
      }
      for (std::size_t p = 0; p < pooled_n; ++p) {
        const double* wr = P + l.dense_w + p * H;
        double* gr = G.data() + l.dense_w + p * H;
        const double a = c.pooled_drop[p];
        double acc = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
          gr[h] += a * dhid[h];
          acc += wr[h] * dhid[h];
        }
        dpool[p] = acc;
      }
    } else {
      std::copy(din.begin(), din.end(), dpool.begin());
    }
    if (!c.pooled_mask.empty()) {
      for (std::size_t p = 0; p < pooled_n; ++p) dpool[p] *= c.pooled_mask[p];
    }
    for (std::size_t b = 0; b < l.convs.size(); ++b) {
      const ConvBlock& blk = l.convs[b];
      const auto F = static_cast<std::size_t>(blk.filters);
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t col = blk.pooled_offset + f;
        const auto t = static_cast<std::size_t>(c.argmax[col]);
        dy_top[i][col] = dpool[col] * activation_derivative(act, c.y[b][t * F + f], c.pooled[col]);
      }
    }
  }

  // Batch-norm and convolution backward.
  std::vector<double> dz, dx;
  for (std::size_t b = 0; b < l.convs.size(); ++b) {
    const ConvBlock& blk = l.convs[b];
    const auto F = static_cast<std::size_t>(blk.filters);
    const auto T = static_cast<std::size_t>(l.positions(blk));
    const auto width = static_cast<std::size_t>(blk.width);
    std::vector<double> inv_std(F, 1.0), mu(F, 0.0), gamma(F, 1.0);
    if (bn) {
      for (std::size_t f = 0; f < F; ++f) {
        mu[f] = mean[blk.pooled_offset + f];
        inv_std[f] = 1.0 / std::sqrt(var[blk.pooled_offset + f] + kBnEpsilon);
        gamma[f] = P[blk.gamma + f];
      }
    }
    // Sums over the batch of dxhat and dxhat * xhat, for the batch-stat case.
    std::vector<double> s1(F, 0.0), s2(F, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      const ForwardCache& c = caches[i];
      for (std::size_t f = 0; f < F; ++f) {
        const double g = dy_top[i][blk.pooled_offset + f];
        if (g == 0.0) continue;
        const auto t = static_cast<std::size_t>(c.argmax[blk.pooled_offset + f]);
        const double xhat = (c.z[b][t * F + f] - mu[f]) * inv_std[f];
        if (bn) {
          G[blk.gamma + f] += g * xhat;
          G[blk.beta + f] += g;
        }
        s1[f] += g * gamma[f];
        s2[f] += g * gamma[f] * xhat;
      }
    }
    const bool dense_dz = bn && opt.batch_stats;
    const double count = static_cast<double>(B * T);
    const double* W = P + blk.weight;
    double* GW = G.data() + blk.weight;
    for (std::size_t i = 0; i < B; ++i) {
      const ForwardCache& c = caches[i];
      dz.assign(T * F, 0.0);
      if (dense_dz) {
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t f = 0; f < F; ++f) {
            const double xhat = (c.z[b][t * F + f] - mu[f]) * inv_std[f];
            dz[t * F + f] = -inv_std[f] / count * (s1[f] + xhat * s2[f]);
          }
      }
      for (std::size_t f = 0; f < F; ++f) {
        const double g = dy_top[i][blk.pooled_offset + f];
        if (g == 0.0) continue;
        const auto t = static_cast<std::size_t>(c.argmax[blk.pooled_offset + f]);
        dz[t * F + f] += g * gamma[f] * inv_std[f];
      }
      dx.assign(static_cast<std::size_t>(l.max_len) * E, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        const double* dzr = dz.data() + t * F;
        bool any = false;
        for (std::size_t f = 0; f < F && !any; ++f) any = dzr[f] != 0.0;
        if (!any) continue;
        for (std::size_t f = 0; f < F; ++f) G[blk.bias + f] += dzr[f];
        for (std::size_t j = 0; j < width; ++j) {
          const double* xr = c.x.data() + (t + j) * E;
          double* dxr = dx.data() + (t + j) * E;
          for (std::size_t e = 0; e < E; ++e) {
            const double* wr = W + (j * E + e) * F;
            double* gwr = GW + (j * E + e) * F;
            const double xv = xr[e];
            double acc = 0.0;
            for (std::size_t f = 0; f < F; ++f) {
              gwr[f] += xv * dzr[f];
              acc += wr[f] * dzr[f];
            }
            dxr[e] += acc;
          }
        }
      }
      // Embedding rows; the padding row never receives gradient.
      for (std::size_t t = 0; t < static_cast<std::size_t>(l.max_len); ++t) {
        const auto id = static_cast<std::size_t>(c.ids[t]);
        if (id == 0) continue;
        double* ge = G.data() + l.embedding + id * E;
        const double* dxr = dx.data() + t * E;
        if (c.embed_mask.empty()) {
          for (std::size_t e = 0; e < E; ++e) ge[e] += dxr[e];
        } else {
          const double* mk = c.embed_mask.data() + t * E;
          for (std::size_t e = 0; e < E; ++e) ge[e] += dxr[e] * mk[e];
        }
      }
    }
  }
  return res;
}

}  // namespace detail

double loss_and_gradient(const CnnModel& model, std::span<const std::vector<int>> ids,
                         std::span<const int> labels, std::span<const double> weights,
                         std::vector<double>* gradient) {
  std::vector<ForwardCache> caches;
  detail::PassOptions opt;
  opt.weights = weights;
  return detail::batch_pass(model, ids, labels, opt, caches, gradient).loss;
}

namespace {

GradCheckResult run_grad_check(const CnnModel& model, std::span<const std::vector<int>> ids,
                               std::span<const int> labels, double epsilon, std::uint64_t seed,
                               int max_params, bool batch_stats) {
  require(epsilon >= 1e-6 && epsilon <= 1e-4, ErrorCode::kInvalidArgument,
          "epsilon must be in [1e-6, 1e-4]");
  detail::PassOptions opt;
  opt.batch_stats = batch_stats;
  std::vector<ForwardCache> caches;
  std::vector<double> analytic;
  const auto base = detail::batch_pass(model, ids, labels, opt, caches, &analytic);

  // Candidate parameters: everything except the pinned padding row.
  const Layout& l = model.layout;
  std::vector<std::size_t> candidates;
  for (std::size_t p = static_cast<std::size_t>(l.embed_dim); p < l.total; ++p) candidates.push_back(p);
  Rng rng(seed);
  rng.shuffle(candidates);
  if (static_cast<int>(candidates.size()) > max_params) candidates.resize(static_cast<std::size_t>(max_params));
  std::sort(candidates.begin(), candidates.end());

  GradCheckResult out;
  CnnModel probe = model;
  for (std::size_t p : candidates) {
    const double orig = probe.params[p];
    double h = epsilon;
    double numeric = 0.0;
    bool smooth = false;
    // A perturbation that moves a max-pool winner crosses a kink; shrink it.
    for (int attempt = 0; attempt < 3 && !smooth; ++attempt, h *= 0.1) {
      probe.params[p] = orig + h;
      const auto plus = detail::batch_pass(probe, ids, labels, opt, caches, nullptr);
      probe.params[p] = orig - h;
      const auto minus = detail::batch_pass(probe, ids, labels, opt, caches, nullptr);
      probe.params[p] = orig;
      smooth = plus.argmax_signature == base.argmax_signature &&
               minus.argmax_signature == base.argmax_signature;
      numeric = (plus.loss - minus.loss) / (2.0 * h);
    }
    const double a = analytic[p];
    const double scale = std::max(std::abs(a), std::abs(numeric));
    if (!smooth || scale < 1e-8) {
      ++out.skipped;
      continue;
    }
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / scale);
    ++out.checked;
  }
  return out;
}

}  // namespace

GradCheckResult grad_check(const CnnModel& model, std::span<const std::vector<int>> ids,
                           std::span<const int> labels, double epsilon, std::uint64_t seed,
                           int max_params) {
  return run_grad_check(model, ids, labels, epsilon, seed, max_params, false);
}

GradCheckResult grad_check_batch_stats(const CnnModel& model, std::span<const std::vector<int>> ids,
                                       std::span<const int> labels, double epsilon,
                                       std::uint64_t seed, int max_params) {
  return run_grad_check(model, ids, labels, epsilon, seed, max_params, true);
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_loss,val_loss,lr,checkpoint\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.learning_rate << ','
       << (e.checkpoint ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace namecraft::cnn
