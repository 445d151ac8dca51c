#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "siglab/errors.hpp"
#include "siglab/loss.hpp"

using namespace siglab;

TEST_CASE("pair labels are +1 on the diagonal, -1 off") {
  const Matrix labels = pair_label_matrix(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(labels(i, j) == (i == j ? 1.0 : -1.0));
  }
}

TEST_CASE("single identical pair reduces to the scalar closed form") {
  Matrix z(1, 4);
  z(0, 0) = 1.0;
  const LossParams params;  // t = 10, b = -10
  const LossOutput out = sigmoid_loss(z, z, params);
  // One positive with dot 1: loss = -log_sigmoid(t * 1 + b) = -log_sigmoid(0).
  CHECK(out.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(out.positive_logit_mean == doctest::Approx(0.0));
  CHECK(out.negative_logit_mean == 0.0);  // no negatives at n = 1
}

TEST_CASE("sigmoid value matches the term-by-term oracle and is swap-symmetric") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Matrix zi = oracles::random_unit_rows(7, 5, seed);
    const Matrix zt = oracles::random_unit_rows(7, 5, seed + 100);
    const LossParams params{0.3, -2.0};
    const double got = sigmoid_loss(zi, zt, params).value;
    CHECK(got == doctest::Approx(oracles::sigmoid_value(zi, zt, 0.3, -2.0)).epsilon(1e-13));
    CHECK(got == doctest::Approx(sigmoid_loss(zt, zi, params).value).epsilon(1e-13));
  }
}

TEST_CASE("unnormalized and mismatched inputs are rejected") {
  Matrix bad(2, 3);
  bad(0, 0) = 2.0;
  bad(1, 1) = 1.0;
  const Matrix ok = oracles::random_unit_rows(2, 3, 5);
  CHECK_THROWS_AS(sigmoid_loss(bad, ok, LossParams{}), NotNormalized);
  CHECK_THROWS_AS(sigmoid_loss(ok, oracles::random_unit_rows(3, 3, 6), LossParams{}),
                  ShapeMismatch);
  CHECK_THROWS_AS(sigmoid_loss(ok, oracles::random_unit_rows(2, 4, 7), LossParams{}),
                  ShapeMismatch);
  CHECK_THROWS_AS(sigmoid_loss(Matrix(0, 3), Matrix(0, 3), LossParams{}), ShapeMismatch);
}

TEST_CASE("sigmoid gradients match finite differences of the oracle") {
  Matrix zi = oracles::random_unit_rows(5, 4, 21);
  Matrix zt = oracles::random_unit_rows(5, 4, 22);
  const LossParams params{0.5, -1.0};
  const LossGrads lg = sigmoid_loss_grads(zi, zt, params);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double fd_i = oracles::central_diff(
          zi, r, c, [&]() { return oracles::sigmoid_value(zi, zt, 0.5, -1.0); });
      CHECK(oracles::rel_close(lg.d_zimg(r, c), fd_i, 1e-6));
      const double fd_t = oracles::central_diff(
          zt, r, c, [&]() { return oracles::sigmoid_value(zi, zt, 0.5, -1.0); });
      CHECK(oracles::rel_close(lg.d_ztxt(r, c), fd_t, 1e-6));
    }
  }
}

TEST_CASE("positive and negative logit means are the plain averages") {
  const Matrix zi = oracles::random_unit_rows(4, 3, 31);
  const Matrix zt = oracles::random_unit_rows(4, 3, 32);
  const LossParams params{0.0, 1.5};
  const LossOutput out = sigmoid_loss(zi, zt, params);
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double m = dot(zi.row_ptr(i), zt.row_ptr(j), 3) + 1.5;
      if (i == j) {
        pos += m;
      } else {
        neg += m;
      }
    }
  }
  CHECK(out.positive_logit_mean == doctest::Approx(pos / 4.0).epsilon(1e-12));
  CHECK(out.negative_logit_mean == doctest::Approx(neg / 12.0).epsilon(1e-12));
}

TEST_CASE("softmax loss: n = 1 is exactly zero and d_bias stays zero") {
  Matrix z(1, 2);
  z(0, 1) = 1.0;
  CHECK(softmax_loss(z, z, 2.0).value == 0.0);
  const LossGrads lg = softmax_loss_grads(z, z, 2.0);
  CHECK(lg.d_bias == 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(lg.d_zimg(0, c) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("softmax value matches the long-double oracle") {
  for (std::uint64_t seed : {11u, 12u}) {
    const Matrix zi = oracles::random_unit_rows(6, 5, seed);
    const Matrix zt = oracles::random_unit_rows(6, 5, seed + 50);
    const double got = softmax_loss(zi, zt, 1.1).value;
    CHECK(got == doctest::Approx(oracles::softmax_value(zi, zt, 1.1)).epsilon(1e-13));
  }
}

TEST_CASE("masking: none keeps everything, ratios are checked, selection is seeded") {
  const Matrix zi = oracles::random_unit_rows(6, 4, 41);
  const Matrix zt = oracles::random_unit_rows(6, 4, 42);
  const LossOutput full = sigmoid_loss(zi, zt, LossParams{});

  const PairMask none = build_mask(full.pair_losses, MaskSpec{MaskStrategy::none, 1.0, 0});
  CHECK(masked_loss_value(full.pair_losses, none) == doctest::Approx(full.value).epsilon(1e-15));

  CHECK_THROWS_AS(build_mask(full.pair_losses, MaskSpec{MaskStrategy::random, 0.5, 0}),
                  InvalidRatio);
  CHECK_THROWS_AS(build_mask(full.pair_losses, MaskSpec{MaskStrategy::random, 6.0, 0}),
                  InvalidRatio);

  const MaskSpec spec{MaskStrategy::random, 2.0, 9};
  const PairMask a = build_mask(full.pair_losses, spec);
  const PairMask b = build_mask(full.pair_losses, spec);
  CHECK(a.keep == b.keep);
  CHECK(a.kept_negatives() == 12);  // round(6 * 2)
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.at(i, i));

  // Masked value equals the hand sum over kept entries.
  KahanSum manual;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (a.at(i, j)) manual.add(full.pair_losses(i, j));
    }
  }
  CHECK(masked_loss_value(full.pair_losses, a) ==
        doctest::Approx(manual.value() / 6.0).epsilon(1e-15));
}

TEST_CASE("hard masking keeps the largest per-pair losses") {
  const Matrix zi = oracles::random_unit_rows(5, 4, 51);
  const Matrix zt = oracles::random_unit_rows(5, 4, 52);
  const LossOutput full = sigmoid_loss(zi, zt, LossParams{0.0, 0.0});
  const PairMask hard = build_mask(full.pair_losses, MaskSpec{MaskStrategy::hard, 1.0, 0});
  const PairMask easy = build_mask(full.pair_losses, MaskSpec{MaskStrategy::easy, 1.0, 0});
  double hard_min = 1e300, easy_max = -1e300;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      if (hard.at(i, j)) hard_min = std::min(hard_min, full.pair_losses(i, j));
      if (easy.at(i, j)) easy_max = std::max(easy_max, full.pair_losses(i, j));
    }
  }
  // Every kept hard negative is at least as hard as every kept easy one.
  CHECK(hard_min >= easy_max);
  CHECK(hard.kept_negatives() == easy.kept_negatives());
}

TEST_CASE("masked gradients zero out dropped pairs but keep the divisor") {
  const Matrix zi = oracles::random_unit_rows(4, 3, 61);
  const Matrix zt = oracles::random_unit_rows(4, 3, 62);
  const LossParams params{0.2, -0.7};
  const LossOutput full = sigmoid_loss(zi, zt, params);
  const PairMask mask = build_mask(full.pair_losses, MaskSpec{MaskStrategy::random, 1.0, 3});
  const LossGrads masked = sigmoid_loss_grads(zi, zt, params, &mask);

  // Finite differences of the masked objective (fixed mask).
  Matrix pi = zi;
  auto masked_value = [&]() {
    const std::size_t n = 4;
    const double t = std::exp(params.t_prime);
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!mask.at(i, j)) continue;
        const double s = dot(pi.row_ptr(i), zt.row_ptr(j), 3);
        const double z = i == j ? 1.0 : -1.0;
        acc.add(-log_sigmoid(z * (t * s + params.bias)));
      }
    }
    return acc.value() / static_cast<double>(n);
  };
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double fd = oracles::central_diff(pi, r, c, masked_value);
      CHECK(oracles::rel_close(masked.d_zimg(r, c), fd, 1e-6));
    }
  }
}

TEST_CASE("strategy names round-trip") {
  for (MaskStrategy s :
       {MaskStrategy::none, MaskStrategy::random, MaskStrategy::hard, MaskStrategy::easy}) {
    CHECK(mask_strategy_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(mask_strategy_from_string("hardest"), ConfigError);
}
