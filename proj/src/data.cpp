#include "siglab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "siglab/errors.hpp"
#include "siglab/rng.hpp"

namespace siglab {

namespace {

constexpr double kClusterSigma = 0.5;

// Quartile edges of a standard normal; latent coordinates land in one of
// kQuantBuckets bands.
std::uint32_t quant_bucket(double z) {
  if (z <= -0.6745) return 0;
  if (z <= 0.0) return 1;
  if (z <= 0.6745) return 2;
  return 3;
}

struct TaskStructure {
  Matrix projection;     // image_dim x latent_dim
  Matrix class_centers;  // n_classes x latent_dim
};

TaskStructure build_structure(const SyntheticPairSpec& spec) {
  TaskStructure ts;
  RngStream proj_rng(derive_seed(spec.seed, 0x70726f6aull));
  ts.projection = Matrix(spec.image_dim, spec.latent_dim);
  const double std_dev = std::sqrt(1.0 / static_cast<double>(spec.latent_dim));
  for (std::size_t r = 0; r < spec.image_dim; ++r) {
    for (std::size_t c = 0; c < spec.latent_dim; ++c) {
      ts.projection(r, c) = proj_rng.next_normal() * std_dev;
    }
  }
  RngStream center_rng(derive_seed(spec.seed, 0x63747273ull));
  ts.class_centers = Matrix(spec.n_classes, spec.latent_dim);
  for (std::size_t r = 0; r < spec.n_classes; ++r) {
    for (std::size_t c = 0; c < spec.latent_dim; ++c) {
      ts.class_centers(r, c) = center_rng.next_normal();
    }
  }
  return ts;
}

}  // namespace

std::size_t min_vocab_size(const SyntheticPairSpec& spec) {
  return 1 + spec.n_classes * kClassPoolSize + spec.latent_dim * kQuantBuckets;
}

void validate(const SyntheticPairSpec& spec) {
  if (spec.latent_dim == 0 || spec.image_dim == 0 || spec.text_len == 0 || spec.n_classes == 0) {
    throw ConfigError("synthetic data dims must be positive");
  }
  if (spec.noise_sigma < 0.0) {
    throw ConfigError("noise_sigma must be nonnegative");
  }
  if (spec.vocab_size < min_vocab_size(spec)) {
    throw ConfigError("vocab_size " + std::to_string(spec.vocab_size) + " below required " +
                      std::to_string(min_vocab_size(spec)));
  }
}

PairDataset generate(const SyntheticPairSpec& spec, std::size_t count, std::uint64_t stream_id) {
  validate(spec);
  const TaskStructure ts = build_structure(spec);
  RngStream rng(derive_seed(spec.seed, 0x65780000ull + stream_id));

  PairDataset ds;
  ds.images = Matrix(count, spec.image_dim);
  ds.tokens.n = count;
  ds.tokens.len = spec.text_len;
  ds.tokens.ids.assign(count * spec.text_len, kPadToken);
  ds.class_ids.resize(count);
  ds.latents = Matrix(count, spec.latent_dim);

  // Token layout: the first half of the sequence names the class, the
  // rest quantizes latent coordinates in order.
  const std::size_t n_class_pos = std::max<std::size_t>(1, spec.text_len / 2);
  const std::uint32_t quant_base =
      1 + static_cast<std::uint32_t>(spec.n_classes * kClassPoolSize);

  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t cls = static_cast<std::uint32_t>(i % spec.n_classes);
    ds.class_ids[i] = cls;
    for (std::size_t j = 0; j < spec.latent_dim; ++j) {
      ds.latents(i, j) = ts.class_centers(cls, j) + kClusterSigma * rng.next_normal();
    }
    for (std::size_t r = 0; r < spec.image_dim; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < spec.latent_dim; ++j) {
        acc += ts.projection(r, j) * ds.latents(i, j);
      }
      ds.images(i, r) = acc + spec.noise_sigma * rng.next_normal();
    }
    for (std::size_t p = 0; p < spec.text_len; ++p) {
      if (p < n_class_pos) {
        const std::uint32_t pick = static_cast<std::uint32_t>(rng.next_index(kClassPoolSize));
        ds.tokens.at(i, p) = 1 + cls * static_cast<std::uint32_t>(kClassPoolSize) + pick;
      } else {
        const std::size_t j = (p - n_class_pos) % spec.latent_dim;
        ds.tokens.at(i, p) = quant_base +
                             static_cast<std::uint32_t>(j * kQuantBuckets) +
                             quant_bucket(ds.latents(i, j));
      }
    }
  }
  return ds;
}

void validate(const CorruptionSpec& cspec) {
  for (double p : {cspec.image_noise_p, cspec.text_scramble_p, cspec.misalign_p}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("corruption probabilities must lie in [0, 1]");
    }
  }
}

CorruptResult corrupt(const Matrix& images, const TokenBatch& tokens, std::size_t vocab_size,
                      const CorruptionSpec& cspec) {
  validate(cspec);
  const std::size_t n = images.rows();
  if (tokens.n != n) {
    throw ShapeMismatch("image and token batch sizes differ");
  }
  if (vocab_size < 2) {
    throw ConfigError("vocab_size must allow at least one non-PAD token");
  }

  CorruptResult out;
  out.images = images;
  out.tokens = tokens;

  // Value range of the input batch, fixed before any replacement.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < images.rows(); ++r) {
    for (std::size_t c = 0; c < images.cols(); ++c) {
      lo = std::min(lo, images(r, c));
      hi = std::max(hi, images(r, c));
    }
  }
  if (n == 0) return out;

  RngStream img_rng(derive_seed(cspec.seed, 0x696e6f69ull));
  for (std::size_t i = 0; i < n; ++i) {
    if (img_rng.next_double() < cspec.image_noise_p) {
      ++out.report.images_replaced;
      for (std::size_t c = 0; c < images.cols(); ++c) {
        out.images(i, c) = img_rng.uniform(lo, hi);
      }
    }
  }

  RngStream txt_rng(derive_seed(cspec.seed, 0x73637261ull));
  for (std::size_t i = 0; i < n; ++i) {
    if (txt_rng.next_double() < cspec.text_scramble_p) {
      ++out.report.texts_scrambled;
      const std::size_t len = 1 + txt_rng.next_index(tokens.len);
      for (std::size_t p = 0; p < tokens.len; ++p) {
        out.tokens.at(i, p) =
            p < len ? static_cast<std::uint32_t>(1 + txt_rng.next_index(vocab_size - 1))
                    : kPadToken;
      }
    }
  }

  const std::size_t k = static_cast<std::size_t>(std::llround(cspec.misalign_p * static_cast<double>(n)));
  if (k >= 2) {
    RngStream mis_rng(derive_seed(cspec.seed, 0x6d697361ull));
    // Choose k positions without replacement, then permute their texts
    // uniformly among themselves.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + mis_rng.next_index(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<std::size_t> perm(idx);
    for (std::size_t i = k; i-- > 1;) {
      const std::size_t j = mis_rng.next_index(i + 1);
      std::swap(perm[i], perm[j]);
    }
    TokenBatch shuffled = out.tokens;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t p = 0; p < tokens.len; ++p) {
        shuffled.at(idx[i], p) = out.tokens.at(perm[i], p);
      }
    }
    out.tokens = std::move(shuffled);
    out.report.pairs_misaligned = k;
  } else if (k == 1) {
    // A single selected pair permutes to itself; the channel touches it
    // but cannot move anything.
    out.report.pairs_misaligned = 1;
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'L', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw IoError("truncated dataset file: " + path);
  }
  return value;
}

}  // namespace

void save_dataset(const PairDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open dataset for writing: " + path);
  }
  out.write(kMagic, 4);
  write_raw(out, kDatasetVersion);
  write_raw(out, static_cast<std::uint64_t>(ds.size()));
  write_raw(out, static_cast<std::uint64_t>(ds.images.cols()));
  write_raw(out, static_cast<std::uint64_t>(ds.tokens.len));
  for (std::size_t r = 0; r < ds.images.rows(); ++r) {
    out.write(reinterpret_cast<const char*>(ds.images.row_ptr(r)),
              static_cast<std::streamsize>(ds.images.cols() * sizeof(double)));
  }
  out.write(reinterpret_cast<const char*>(ds.tokens.ids.data()),
            static_cast<std::streamsize>(ds.tokens.ids.size() * sizeof(std::uint32_t)));
  out.write(reinterpret_cast<const char*>(ds.class_ids.data()),
            static_cast<std::streamsize>(ds.class_ids.size() * sizeof(std::uint32_t)));
  if (!out) {
    throw IoError("failed writing dataset: " + path);
  }
}

PairDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open dataset: " + path);
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a dataset file: " + path);
  }
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != kDatasetVersion) {
    throw IoError("unsupported dataset version in " + path);
  }
  const auto n = read_raw<std::uint64_t>(in, path);
  const auto image_dim = read_raw<std::uint64_t>(in, path);
  const auto text_len = read_raw<std::uint64_t>(in, path);

  PairDataset ds;
  ds.images = Matrix(n, image_dim);
  for (std::size_t r = 0; r < ds.images.rows(); ++r) {
    in.read(reinterpret_cast<char*>(ds.images.row_ptr(r)),
            static_cast<std::streamsize>(image_dim * sizeof(double)));
  }
  ds.tokens.n = n;
  ds.tokens.len = text_len;
  ds.tokens.ids.resize(n * text_len);
  in.read(reinterpret_cast<char*>(ds.tokens.ids.data()),
          static_cast<std::streamsize>(ds.tokens.ids.size() * sizeof(std::uint32_t)));
  ds.class_ids.resize(n);
  in.read(reinterpret_cast<char*>(ds.class_ids.data()),
          static_cast<std::streamsize>(ds.class_ids.size() * sizeof(std::uint32_t)));
  if (!in) {
    throw IoError("truncated dataset file: " + path);
  }
  return ds;
}

}  // namespace siglab
