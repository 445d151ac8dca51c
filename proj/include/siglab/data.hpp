#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglab/matrix.hpp"
#include "siglab/model.hpp"

namespace siglab {

// Paired synthetic data: a latent z drawn near a class center explains
// both sides. Images observe A*z plus Gaussian noise; texts carry tokens
// from the class's pool plus tokens quantizing individual latent
// coordinates, so matched pairs predict each other through both global
// and instance information.
struct SyntheticPairSpec {
  std::size_t latent_dim = 8;
  std::size_t image_dim = 16;
  std::size_t vocab_size = 256;
  std::size_t text_len = 8;
  std::size_t n_classes = 8;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
};

// Token ids above PAD: n_classes pools of kClassPoolSize, then
// latent_dim groups of kQuantBuckets.
inline constexpr std::size_t kClassPoolSize = 4;
inline constexpr std::size_t kQuantBuckets = 4;

std::size_t min_vocab_size(const SyntheticPairSpec& spec);

// ConfigError on zero dims, negative noise, or a vocab too small for the
// token layout.
void validate(const SyntheticPairSpec& spec);

struct PairDataset {
  Matrix images;                         // n x image_dim
  TokenBatch tokens;                     // n x text_len
  std::vector<std::uint32_t> class_ids;  // n
  Matrix latents;                        // n x latent_dim; empty after import

  std::size_t size() const { return images.rows(); }
};

// Deterministic for (spec, stream_id): the generating structures (class
// centers, projection, token layout) depend only on spec.seed, while
// per-example draws live on a stream keyed by stream_id, so different
// streams give disjoint example sets over shared structure. Classes are
// assigned round-robin.
PairDataset generate(const SyntheticPairSpec& spec, std::size_t count, std::uint64_t stream_id);

struct CorruptionSpec {
  double image_noise_p = 0.0;
  double text_scramble_p = 0.0;
  double misalign_p = 0.0;
  std::uint64_t seed = 0;
};

void validate(const CorruptionSpec& cspec);

struct CorruptionReport {
  std::size_t images_replaced = 0;
  std::size_t texts_scrambled = 0;
  std::size_t pairs_misaligned = 0;
};

struct CorruptResult {
  Matrix images;
  TokenBatch tokens;
  CorruptionReport report;
};

// Channels apply independently: each image is replaced with probability
// image_noise_p by uniform noise over the input batch's value range;
// each text with probability text_scramble_p by a fresh sequence of
// random non-PAD tokens of length uniform in [1, text_len], PAD-filled;
// finally round(misalign_p * n) positions are chosen and their texts
// permuted uniformly among themselves. Untouched items pass through
// bit-identical. Pure in (inputs, cspec).
CorruptResult corrupt(const Matrix& images, const TokenBatch& tokens, std::size_t vocab_size,
                      const CorruptionSpec& cspec);

// Columnar binary export: magic, version, counts and dims, then images
// (f64), token ids (u32), class ids (u32), all little-endian. Latents
// are a generation-side aid and are not stored.
void save_dataset(const PairDataset& ds, const std::string& path);
PairDataset load_dataset(const std::string& path);

}  // namespace siglab
