#include "siglab/model.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "siglab/errors.hpp"

#include "json.hpp"

namespace siglab {

std::size_t MlpEncoder::param_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    total += weights[l].size() + biases[l].size();
  }
  return total;
}

MlpEncoder make_mlp(const std::vector<std::size_t>& layer_dims, RngStream& rng) {
  if (layer_dims.size() < 2) {
    throw ConfigError("encoder needs at least input and output dims");
  }
  MlpEncoder enc;
  enc.layer_dims = layer_dims;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    Matrix w(fan_in, fan_out);
    const double std_dev = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (std::size_t r = 0; r < fan_in; ++r) {
      for (std::size_t c = 0; c < fan_out; ++c) {
        w(r, c) = rng.next_normal() * std_dev;
      }
    }
    enc.weights.push_back(std::move(w));
    enc.biases.emplace_back(1, fan_out);
  }
  return enc;
}

Matrix forward(const MlpEncoder& enc, const Matrix& x, ForwardCache* cache) {
  if (x.cols() != enc.input_dim()) {
    throw ShapeMismatch("encoder input has " + std::to_string(x.cols()) + " cols, expected " +
                        std::to_string(enc.input_dim()));
  }
  if (cache) {
    cache->layer_dims = enc.layer_dims;
    cache->act.clear();
    cache->act.push_back(x);
  }
  Matrix a = x;
  for (std::size_t l = 0; l < enc.n_layers(); ++l) {
    Matrix z = matmul(a, enc.weights[l]);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      for (std::size_t c = 0; c < z.cols(); ++c) {
        z(r, c) += enc.biases[l](0, c);
      }
    }
    const bool hidden = l + 1 < enc.n_layers();
    if (hidden) {
      for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t c = 0; c < z.cols(); ++c) {
          z(r, c) = std::tanh(z(r, c));
        }
      }
    }
    a = std::move(z);
    if (cache) cache->act.push_back(a);
  }
  return a;
}

MlpGrads backward(const MlpEncoder& enc, const ForwardCache& cache, const Matrix& d_embeddings) {
  if (cache.layer_dims != enc.layer_dims || cache.act.size() != enc.n_layers() + 1) {
    throw StaleCache("forward cache does not match this encoder");
  }
  for (std::size_t l = 0; l <= enc.n_layers(); ++l) {
    if (cache.act[l].cols() != enc.layer_dims[l]) {
      throw StaleCache("cached activation width mismatch at layer " + std::to_string(l));
    }
  }
  if (!d_embeddings.same_shape(cache.act.back())) {
    throw ShapeMismatch("d_embeddings shape does not match cached output");
  }

  MlpGrads grads;
  grads.d_weights.resize(enc.n_layers());
  grads.d_biases.resize(enc.n_layers());

  Matrix delta = d_embeddings;  // dL/dz for the layer being processed
  for (std::size_t li = enc.n_layers(); li-- > 0;) {
    const Matrix& a_in = cache.act[li];
    grads.d_weights[li] = matmul(transpose(a_in), delta);
    Matrix db(1, delta.cols());
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      for (std::size_t c = 0; c < delta.cols(); ++c) {
        db(0, c) += delta(r, c);
      }
    }
    grads.d_biases[li] = std::move(db);
    Matrix d_a = matmul(delta, transpose(enc.weights[li]));
    if (li > 0) {
      // a_in is a tanh output here, so tanh' = 1 - a^2.
      for (std::size_t r = 0; r < d_a.rows(); ++r) {
        for (std::size_t c = 0; c < d_a.cols(); ++c) {
          const double a = a_in(r, c);
          d_a(r, c) *= 1.0 - a * a;
        }
      }
    }
    delta = std::move(d_a);
  }
  grads.d_input = std::move(delta);
  return grads;
}

NormalizeResult normalize_with_grad(const Matrix& raw, const Matrix& d_normalized) {
  if (!raw.same_shape(d_normalized)) {
    throw ShapeMismatch("raw and d_normalized shapes differ");
  }
  NormalizeResult out;
  out.normalized = Matrix(raw.rows(), raw.cols());
  out.d_raw = Matrix(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      sq += raw(r, c) * raw(r, c);
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-30) {
      throw ZeroRow("row " + std::to_string(r) + " has zero norm");
    }
    double radial = 0.0;
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      const double u = raw(r, c) / norm;
      out.normalized(r, c) = u;
      radial += d_normalized(r, c) * u;
    }
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      out.d_raw(r, c) = (d_normalized(r, c) - radial * out.normalized(r, c)) / norm;
    }
  }
  return out;
}

BottleneckEmbedding make_bottleneck(std::size_t vocab_size, std::size_t bottleneck_k,
                                    std::size_t model_width, RngStream& rng) {
  if (vocab_size == 0 || bottleneck_k == 0 || model_width == 0) {
    throw ConfigError("bottleneck embedding dims must be positive");
  }
  BottleneckEmbedding be;
  be.vocab_size = vocab_size;
  be.bottleneck_k = bottleneck_k;
  be.model_width = model_width;
  be.lookup = Matrix(vocab_size, bottleneck_k);
  for (std::size_t r = 0; r < vocab_size; ++r) {
    for (std::size_t c = 0; c < bottleneck_k; ++c) {
      be.lookup(r, c) = rng.next_normal();
    }
  }
  be.projection = Matrix(bottleneck_k, model_width);
  const double std_dev = std::sqrt(1.0 / static_cast<double>(bottleneck_k));
  for (std::size_t r = 0; r < bottleneck_k; ++r) {
    for (std::size_t c = 0; c < model_width; ++c) {
      be.projection(r, c) = rng.next_normal() * std_dev;
    }
  }
  return be;
}

Matrix embed_tokens(const BottleneckEmbedding& be, const std::vector<std::uint32_t>& token_ids) {
  Matrix out(token_ids.size(), be.model_width);
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    const std::uint32_t id = token_ids[i];
    if (id >= be.vocab_size) {
      throw OutOfVocab("token id " + std::to_string(id) + " >= vocab size " +
                       std::to_string(be.vocab_size));
    }
    const double* row = be.lookup.row_ptr(id);
    for (std::size_t w = 0; w < be.model_width; ++w) {
      double acc = 0.0;
      for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
        acc += row[k] * be.projection(k, w);
      }
      out(i, w) = acc;
    }
  }
  return out;
}

Matrix pooled_embed(const BottleneckEmbedding& be, const TokenBatch& tokens, PoolCache* cache) {
  Matrix out(tokens.n, be.model_width);
  if (cache) {
    cache->tokens = tokens;
    cache->inv_count.assign(tokens.n, 0.0);
    cache->all_pad.assign(tokens.n, 0);
  }
  std::vector<double> avg(be.bottleneck_k);
  for (std::size_t i = 0; i < tokens.n; ++i) {
    std::size_t count = 0;
    for (std::size_t p = 0; p < tokens.len; ++p) {
      if (tokens.at(i, p) != kPadToken) ++count;
    }
    const bool all_pad = count == 0;
    if (all_pad) count = tokens.len;
    const double coef = 1.0 / static_cast<double>(count);
    if (cache) {
      cache->inv_count[i] = coef;
      cache->all_pad[i] = all_pad ? 1 : 0;
    }

    std::fill(avg.begin(), avg.end(), 0.0);
    for (std::size_t p = 0; p < tokens.len; ++p) {
      const std::uint32_t id = tokens.at(i, p);
      if (!all_pad && id == kPadToken) continue;
      if (id >= be.vocab_size) {
        throw OutOfVocab("token id " + std::to_string(id) + " >= vocab size " +
                         std::to_string(be.vocab_size));
      }
      const double* row = be.lookup.row_ptr(id);
      for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
        avg[k] += coef * row[k];
      }
    }
    for (std::size_t w = 0; w < be.model_width; ++w) {
      double acc = 0.0;
      for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
        acc += avg[k] * be.projection(k, w);
      }
      out(i, w) = acc;
    }
  }
  return out;
}

PoolGrads pooled_embed_backward(const BottleneckEmbedding& be, const PoolCache& cache,
                                const Matrix& d_pooled) {
  const TokenBatch& tokens = cache.tokens;
  if (d_pooled.rows() != tokens.n || d_pooled.cols() != be.model_width) {
    throw ShapeMismatch("d_pooled shape does not match pooled output");
  }
  if (cache.inv_count.size() != tokens.n || cache.all_pad.size() != tokens.n) {
    throw StaleCache("pool cache does not match this token batch");
  }
  PoolGrads grads;
  grads.d_lookup = Matrix(be.vocab_size, be.bottleneck_k);
  grads.d_projection = Matrix(be.bottleneck_k, be.model_width);

  std::vector<double> avg(be.bottleneck_k);
  std::vector<double> back(be.bottleneck_k);
  for (std::size_t i = 0; i < tokens.n; ++i) {
    const double coef = cache.inv_count[i];
    const bool all_pad = cache.all_pad[i] != 0;

    // back = d_pooled_i * projection^T, shared by every counted token.
    const double* dp = d_pooled.row_ptr(i);
    for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
      double acc = 0.0;
      for (std::size_t w = 0; w < be.model_width; ++w) {
        acc += dp[w] * be.projection(k, w);
      }
      back[k] = acc;
    }
    std::fill(avg.begin(), avg.end(), 0.0);
    for (std::size_t p = 0; p < tokens.len; ++p) {
      const std::uint32_t id = tokens.at(i, p);
      if (!all_pad && id == kPadToken) continue;
      const double* row = be.lookup.row_ptr(id);
      double* dl = grads.d_lookup.row_ptr(id);
      for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
        dl[k] += coef * back[k];
        avg[k] += coef * row[k];
      }
    }
    for (std::size_t k = 0; k < be.bottleneck_k; ++k) {
      for (std::size_t w = 0; w < be.model_width; ++w) {
        grads.d_projection(k, w) += avg[k] * dp[w];
      }
    }
  }
  return grads;
}

TowerMode tower_mode_from_string(const std::string& s) {
  if (s == "both_trainable") return TowerMode::both_trainable;
  if (s == "image_frozen") return TowerMode::image_frozen;
  if (s == "image_pretrained") return TowerMode::image_pretrained;
  throw ConfigError("unknown tower_mode '" + s + "'");
}

std::string to_string(TowerMode mode) {
  switch (mode) {
    case TowerMode::both_trainable: return "both_trainable";
    case TowerMode::image_frozen: return "image_frozen";
    case TowerMode::image_pretrained: return "image_pretrained";
  }
  return "both_trainable";
}

std::size_t TwoTowerModel::param_count() const {
  return image_tower.param_count() + text_embed.param_count() + text_tower.param_count() + 2;
}

TwoTowerModel make_two_tower(const ModelDims& dims, double t_prime_init, double bias_init,
                             std::uint64_t seed) {
  TwoTowerModel model;
  RngStream img_rng(derive_seed(seed, 0x696d67ull));
  RngStream emb_rng(derive_seed(seed, 0x656d62ull));
  RngStream txt_rng(derive_seed(seed, 0x747874ull));
  model.image_tower = make_mlp({dims.image_dim, dims.image_hidden, dims.embed_dim}, img_rng);
  model.text_embed = make_bottleneck(dims.vocab_size, dims.bottleneck_k, dims.text_width, emb_rng);
  model.text_tower = make_mlp({dims.text_width, dims.text_hidden, dims.embed_dim}, txt_rng);
  model.t_prime = Matrix(1, 1);
  model.t_prime(0, 0) = t_prime_init;
  model.bias = Matrix(1, 1);
  model.bias(0, 0) = bias_init;
  return model;
}

std::vector<ParamGroup> param_groups(TwoTowerModel& model, TowerMode mode) {
  ParamGroup image;
  image.name = "image_tower";
  for (std::size_t l = 0; l < model.image_tower.n_layers(); ++l) {
    image.params.push_back(&model.image_tower.weights[l]);
    image.params.push_back(&model.image_tower.biases[l]);
  }
  switch (mode) {
    case TowerMode::both_trainable:
      break;
    case TowerMode::image_frozen:
      image.frozen = true;
      break;
    case TowerMode::image_pretrained:
      image.weight_decay_multiplier = 0.0;
      image.lr_multiplier = 0.1;
      break;
  }

  ParamGroup text;
  text.name = "text";
  text.params.push_back(&model.text_embed.lookup);
  text.params.push_back(&model.text_embed.projection);
  for (std::size_t l = 0; l < model.text_tower.n_layers(); ++l) {
    text.params.push_back(&model.text_tower.weights[l]);
    text.params.push_back(&model.text_tower.biases[l]);
  }

  // Decaying the temperature and bias would drag them toward zero even
  // at convergence, so the loss scalars are exempt.
  ParamGroup loss_scalars;
  loss_scalars.name = "loss";
  loss_scalars.params.push_back(&model.t_prime);
  loss_scalars.params.push_back(&model.bias);
  loss_scalars.weight_decay_multiplier = 0.0;

  return {image, text, loss_scalars};
}

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json tensor_to_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      data.push_back(m(r, c));
    }
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix tensor_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const auto& data = j.at("data");
  if (data.size() != rows * cols) {
    throw ConfigError("checkpoint tensor data length does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = data[idx++].get<double>();
    }
  }
  return m;
}

void add_encoder_tensors(nlohmann::json& tensors, const std::string& prefix,
                         const MlpEncoder& enc) {
  for (std::size_t l = 0; l < enc.n_layers(); ++l) {
    tensors[prefix + ".w" + std::to_string(l)] = tensor_to_json(enc.weights[l]);
    tensors[prefix + ".b" + std::to_string(l)] = tensor_to_json(enc.biases[l]);
  }
}

MlpEncoder encoder_from_json(const nlohmann::json& tensors, const std::string& prefix,
                             const std::vector<std::size_t>& layer_dims) {
  MlpEncoder enc;
  enc.layer_dims = layer_dims;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    Matrix w = tensor_from_json(tensors.at(prefix + ".w" + std::to_string(l)));
    Matrix b = tensor_from_json(tensors.at(prefix + ".b" + std::to_string(l)));
    if (w.rows() != layer_dims[l] || w.cols() != layer_dims[l + 1] || b.rows() != 1 ||
        b.cols() != layer_dims[l + 1]) {
      throw ConfigError("checkpoint tensor shape disagrees with recorded layer dims");
    }
    enc.weights.push_back(std::move(w));
    enc.biases.push_back(std::move(b));
  }
  return enc;
}

}  // namespace

void save_checkpoint(const TwoTowerModel& model, const std::string& path) {
  nlohmann::json tensors;
  add_encoder_tensors(tensors, "image_tower", model.image_tower);
  add_encoder_tensors(tensors, "text_tower", model.text_tower);
  tensors["text_embed.lookup"] = tensor_to_json(model.text_embed.lookup);
  tensors["text_embed.projection"] = tensor_to_json(model.text_embed.projection);
  tensors["loss.t_prime"] = tensor_to_json(model.t_prime);
  tensors["loss.bias"] = tensor_to_json(model.bias);

  nlohmann::json root{
      {"format_version", kCheckpointVersion},
      {"image_layer_dims", model.image_tower.layer_dims},
      {"text_layer_dims", model.text_tower.layer_dims},
      {"vocab_size", model.text_embed.vocab_size},
      {"bottleneck_k", model.text_embed.bottleneck_k},
      {"text_width", model.text_embed.model_width},
      {"tensors", std::move(tensors)},
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open checkpoint for writing: " + path);
  }
  out << root.dump(2) << '\n';
  if (!out) {
    throw IoError("failed writing checkpoint: " + path);
  }
}

TwoTowerModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path);
  }
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path + ": " + e.what());
  }
  try {
    if (root.at("format_version").get<int>() != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint format_version in " + path);
    }
    const auto image_dims = root.at("image_layer_dims").get<std::vector<std::size_t>>();
    const auto text_dims = root.at("text_layer_dims").get<std::vector<std::size_t>>();
    const auto& tensors = root.at("tensors");

    TwoTowerModel model;
    model.image_tower = encoder_from_json(tensors, "image_tower", image_dims);
    model.text_tower = encoder_from_json(tensors, "text_tower", text_dims);
    model.text_embed.vocab_size = root.at("vocab_size").get<std::size_t>();
    model.text_embed.bottleneck_k = root.at("bottleneck_k").get<std::size_t>();
    model.text_embed.model_width = root.at("text_width").get<std::size_t>();
    model.text_embed.lookup = tensor_from_json(tensors.at("text_embed.lookup"));
    model.text_embed.projection = tensor_from_json(tensors.at("text_embed.projection"));
    if (model.text_embed.lookup.rows() != model.text_embed.vocab_size ||
        model.text_embed.lookup.cols() != model.text_embed.bottleneck_k ||
        model.text_embed.projection.rows() != model.text_embed.bottleneck_k ||
        model.text_embed.projection.cols() != model.text_embed.model_width) {
      throw ConfigError("checkpoint embedding shapes disagree with the header");
    }
    model.t_prime = tensor_from_json(tensors.at("loss.t_prime"));
    model.bias = tensor_from_json(tensors.at("loss.bias"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("incomplete checkpoint " + path + ": " + e.what());
  }
}

}  // namespace siglab
