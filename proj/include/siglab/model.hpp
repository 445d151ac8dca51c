#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglab/matrix.hpp"
#include "siglab/rng.hpp"

namespace siglab {

// Token id 0 is reserved for padding throughout.
inline constexpr std::uint32_t kPadToken = 0;

// Fully-connected tower: tanh on hidden layers, identity on the output
// layer. layer_dims runs input -> hidden... -> embed dim.
struct MlpEncoder {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;  // weights[l]: dims[l] x dims[l+1]
  std::vector<Matrix> biases;   // 1 x dims[l+1]

  std::size_t n_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t param_count() const;
};

// Xavier-style init: weight std sqrt(1/fan_in), biases zero.
MlpEncoder make_mlp(const std::vector<std::size_t>& layer_dims, RngStream& rng);

// Activations retained for backprop. act[0] is the input, act[l] the
// output of layer l-1, act.back() the embeddings.
struct ForwardCache {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> act;
};

Matrix forward(const MlpEncoder& enc, const Matrix& x, ForwardCache* cache = nullptr);

struct MlpGrads {
  std::vector<Matrix> d_weights;
  std::vector<Matrix> d_biases;
  Matrix d_input;
};

// Throws StaleCache when the cache does not structurally match enc.
MlpGrads backward(const MlpEncoder& enc, const ForwardCache& cache, const Matrix& d_embeddings);

struct NormalizeResult {
  Matrix normalized;
  Matrix d_raw;
};

// Rows scaled to unit norm; the returned d_raw is the pullback of
// d_normalized, i.e. the tangential component divided by the row norm.
NormalizeResult normalize_with_grad(const Matrix& raw, const Matrix& d_normalized);

// N x K lookup followed by a K x W projection; parameter count
// N*K + K*W instead of N*W for a direct table.
struct BottleneckEmbedding {
  std::size_t vocab_size = 0;
  std::size_t bottleneck_k = 0;
  std::size_t model_width = 0;
  Matrix lookup;      // N x K
  Matrix projection;  // K x W

  std::size_t param_count() const {
    return vocab_size * bottleneck_k + bottleneck_k * model_width;
  }
};

BottleneckEmbedding make_bottleneck(std::size_t vocab_size, std::size_t bottleneck_k,
                                    std::size_t model_width, RngStream& rng);

// Row i = lookup[token_ids[i]] * projection. Throws OutOfVocab.
Matrix embed_tokens(const BottleneckEmbedding& be, const std::vector<std::uint32_t>& token_ids);

// Sequences as fixed-length rows of token ids; PAD fills unused tail
// positions.
struct TokenBatch {
  std::size_t n = 0;
  std::size_t len = 0;
  std::vector<std::uint32_t> ids;  // n * len, row-major

  std::uint32_t at(std::size_t i, std::size_t p) const { return ids[i * len + p]; }
  std::uint32_t& at(std::size_t i, std::size_t p) { return ids[i * len + p]; }
};

struct PoolCache {
  TokenBatch tokens;
  std::vector<double> inv_count;     // 1 / (counted positions), per row
  std::vector<std::uint8_t> all_pad; // rows where PAD positions count too
};

// Mean of projected embeddings over non-PAD positions (over all
// positions when a row is entirely PAD). Shape n x W.
Matrix pooled_embed(const BottleneckEmbedding& be, const TokenBatch& tokens,
                    PoolCache* cache = nullptr);

struct PoolGrads {
  Matrix d_lookup;
  Matrix d_projection;
};

PoolGrads pooled_embed_backward(const BottleneckEmbedding& be, const PoolCache& cache,
                                const Matrix& d_pooled);

enum class TowerMode { both_trainable, image_frozen, image_pretrained };

TowerMode tower_mode_from_string(const std::string& s);
std::string to_string(TowerMode mode);

// Both towers plus the learned loss scalars, kept as 1x1 matrices so the
// optimizer can treat every parameter uniformly.
struct TwoTowerModel {
  MlpEncoder image_tower;          // image_dim -> ... -> embed_dim
  BottleneckEmbedding text_embed;  // vocab -> K -> text width
  MlpEncoder text_tower;           // text width -> ... -> embed_dim
  Matrix t_prime;                  // 1 x 1
  Matrix bias;                     // 1 x 1

  std::size_t param_count() const;
};

struct ModelDims {
  std::size_t image_dim = 16;
  std::size_t image_hidden = 32;
  std::size_t text_width = 24;
  std::size_t text_hidden = 32;
  std::size_t embed_dim = 16;
  std::size_t vocab_size = 256;
  std::size_t bottleneck_k = 8;
};

TwoTowerModel make_two_tower(const ModelDims& dims, double t_prime_init, double bias_init,
                             std::uint64_t seed);

// Named parameter references for the optimizer. Multipliers follow the
// tower mode: pretrained image towers train with lr x0.1 and no decay,
// frozen ones receive no updates. The loss scalars never decay.
struct ParamGroup {
  std::string name;
  std::vector<Matrix*> params;
  double weight_decay_multiplier = 1.0;
  double lr_multiplier = 1.0;
  bool frozen = false;
};

std::vector<ParamGroup> param_groups(TwoTowerModel& model, TowerMode mode);

// JSON checkpoint: header with dims and format version, then one entry
// per tensor {rows, cols, data}. Values round-trip exactly.
void save_checkpoint(const TwoTowerModel& model, const std::string& path);
TwoTowerModel load_checkpoint(const std::string& path);

}  // namespace siglab
