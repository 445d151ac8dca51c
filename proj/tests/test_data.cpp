#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "siglab/data.hpp"
#include "siglab/errors.hpp"

using namespace siglab;

TEST_CASE("spec validation and vocabulary floor") {
  SyntheticPairSpec spec;
  CHECK_NOTHROW(validate(spec));
  CHECK(min_vocab_size(spec) == 1 + 8 * kClassPoolSize + 8 * kQuantBuckets);
  spec.vocab_size = min_vocab_size(spec) - 1;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = SyntheticPairSpec{};
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = SyntheticPairSpec{};
  spec.latent_dim = 0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("generation is deterministic and streams are disjoint") {
  const SyntheticPairSpec spec;
  const PairDataset a = generate(spec, 32, 0);
  const PairDataset b = generate(spec, 32, 0);
  const PairDataset c = generate(spec, 32, 1);
  CHECK(a.images.data() == b.images.data());
  CHECK(a.tokens.ids == b.tokens.ids);
  CHECK(a.class_ids == b.class_ids);
  CHECK(a.images.data() != c.images.data());

  // Same stream, longer prefix: the first examples are unchanged.
  const PairDataset longer = generate(spec, 64, 0);
  for (std::size_t i = 0; i < 32 * spec.image_dim; ++i) {
    CHECK(longer.images.data()[i] == a.images.data()[i]);
  }
}

TEST_CASE("classes are assigned round-robin and shape the latents") {
  SyntheticPairSpec spec;
  spec.n_classes = 4;
  const PairDataset ds = generate(spec, 16, 0);
  for (std::size_t i = 0; i < 16; ++i) CHECK(ds.class_ids[i] == i % 4);
  CHECK(ds.images.rows() == 16);
  CHECK(ds.images.cols() == spec.image_dim);
  CHECK(ds.latents.cols() == spec.latent_dim);
  CHECK(ds.tokens.n == 16);
  CHECK(ds.tokens.len == spec.text_len);
}

TEST_CASE("token layout: class pool prefix, quantization tail, no PAD") {
  SyntheticPairSpec spec;
  spec.n_classes = 4;
  spec.text_len = 8;
  const PairDataset ds = generate(spec, 12, 0);
  const std::size_t class_positions = spec.text_len / 2;
  const std::size_t quant_base = 1 + spec.n_classes * kClassPoolSize;
  for (std::size_t i = 0; i < 12; ++i) {
    const std::uint32_t cls = ds.class_ids[i];
    for (std::size_t p = 0; p < spec.text_len; ++p) {
      const std::uint32_t tok = ds.tokens.at(i, p);
      CHECK(tok != kPadToken);
      CHECK(tok < min_vocab_size(spec));
      if (p < class_positions) {
        // Tokens drawn from this class's private pool.
        CHECK(tok >= 1 + cls * kClassPoolSize);
        CHECK(tok < 1 + (cls + 1) * kClassPoolSize);
      } else {
        CHECK(tok >= quant_base);
      }
    }
  }
}

TEST_CASE("matched pairs are mutual nearest neighbors in latent space") {
  const SyntheticPairSpec spec;
  const PairDataset ds = generate(spec, 48, 2);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < 48; ++i) {
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < 48; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < spec.latent_dim; ++c) {
        const double diff = ds.latents(i, c) - ds.latents(j, c);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        arg = j;
      }
    }
    correct += arg == i;
  }
  CHECK(correct == 48);
}

TEST_CASE("corruption respects probabilities at the extremes") {
  const SyntheticPairSpec spec;
  const PairDataset ds = generate(spec, 64, 0);

  CorruptionSpec off;
  const CorruptResult clean = corrupt(ds.images, ds.tokens, spec.vocab_size, off);
  CHECK(clean.images.data() == ds.images.data());
  CHECK(clean.tokens.ids == ds.tokens.ids);
  CHECK(clean.report.images_replaced == 0);
  CHECK(clean.report.texts_scrambled == 0);
  CHECK(clean.report.pairs_misaligned == 0);

  CorruptionSpec all;
  all.image_noise_p = 1.0;
  all.text_scramble_p = 1.0;
  all.misalign_p = 1.0;
  all.seed = 5;
  const CorruptResult wrecked = corrupt(ds.images, ds.tokens, spec.vocab_size, all);
  CHECK(wrecked.report.images_replaced == 64);
  CHECK(wrecked.report.texts_scrambled == 64);
  CHECK(wrecked.report.pairs_misaligned == 64);
  CHECK(wrecked.images.data() != ds.images.data());
}

TEST_CASE("scrambled texts use the full vocabulary but never PAD") {
  const SyntheticPairSpec spec;
  const PairDataset ds = generate(spec, 32, 0);
  CorruptionSpec cs;
  cs.text_scramble_p = 1.0;
  cs.seed = 7;
  const CorruptResult out = corrupt(ds.images, ds.tokens, spec.vocab_size, cs);
  bool above_layout = false;
  for (std::size_t i = 0; i < 32; ++i) {
    bool in_content = true;
    for (std::size_t p = 0; p < spec.text_len; ++p) {
      const std::uint32_t tok = out.tokens.at(i, p);
      if (in_content && tok == kPadToken) in_content = false;  // PAD only as tail fill
      if (in_content) {
        CHECK(tok >= 1);
        CHECK(tok < spec.vocab_size);
        above_layout = above_layout || tok >= min_vocab_size(spec);
      } else {
        CHECK(tok == kPadToken);
      }
    }
  }
  // Random tokens roam beyond the generator's structured layout.
  CHECK(above_layout);
}

TEST_CASE("misalignment permutes texts among selected rows only") {
  const SyntheticPairSpec spec;
  const PairDataset ds = generate(spec, 40, 0);
  CorruptionSpec cs;
  cs.misalign_p = 0.5;
  cs.seed = 11;
  const CorruptResult out = corrupt(ds.images, ds.tokens, spec.vocab_size, cs);
  CHECK(out.report.pairs_misaligned == 20);
  CHECK(out.images.data() == ds.images.data());

  // The multiset of text rows is preserved, only positions change.
  auto row_of = [&](const TokenBatch& tb, std::size_t i) {
    return std::vector<std::uint32_t>(tb.ids.begin() + static_cast<std::ptrdiff_t>(i * tb.len),
                                      tb.ids.begin() + static_cast<std::ptrdiff_t>((i + 1) * tb.len));
  };
  std::vector<std::vector<std::uint32_t>> before, after;
  std::size_t moved = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    before.push_back(row_of(ds.tokens, i));
    after.push_back(row_of(out.tokens, i));
    moved += before.back() != after.back();
  }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
  CHECK(moved > 0);
  CHECK(moved <= 20);
}

TEST_CASE("corruption validation rejects bad probabilities") {
  CorruptionSpec cs;
  cs.image_noise_p = 1.5;
  CHECK_THROWS_AS(validate(cs), ConfigError);
  cs = CorruptionSpec{};
  cs.misalign_p = -0.25;
  CHECK_THROWS_AS(validate(cs), ConfigError);
}

TEST_CASE("dataset files round-trip") {
  const auto path = (std::filesystem::temp_directory_path() / "siglab_ds.bin").string();
  const SyntheticPairSpec spec;
  const PairDataset ds = generate(spec, 24, 3);
  save_dataset(ds, path);
  const PairDataset back = load_dataset(path);
  CHECK(back.images.data() == ds.images.data());
  CHECK(back.tokens.ids == ds.tokens.ids);
  CHECK(back.class_ids == ds.class_ids);
  CHECK(back.latents.empty());  // latents are generation-only
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_dataset("/nonexistent/ds.bin"), IoError);
  std::ofstream(path, std::ios::binary) << "XXXX not a dataset";
  CHECK_THROWS_AS(load_dataset(path), IoError);
  std::remove(path.c_str());
}
