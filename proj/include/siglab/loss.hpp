#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "siglab/matrix.hpp"

namespace siglab {

inline constexpr double kDefaultTPrime = 2.302585092994045684;  // log 10
inline constexpr double kDefaultBias = -10.0;

// Learnable log-temperature and bias. t = exp(t_prime) is always positive;
// the bias only participates in the sigmoid loss.
struct LossParams {
  double t_prime = kDefaultTPrime;
  double bias = kDefaultBias;

  double temperature() const { return std::exp(t_prime); }
};

struct LossOutput {
  double value = 0.0;
  Matrix pair_losses;  // n x n, every entry >= 0
  double positive_logit_mean = 0.0;
  double negative_logit_mean = 0.0;  // 0 when n == 1 (no negative pairs)
};

struct LossGrads {
  Matrix d_zimg;  // n x d, w.r.t. the normalized image embeddings
  Matrix d_ztxt;  // n x d
  double d_t_prime = 0.0;
  double d_bias = 0.0;
};

enum class MaskStrategy { none, random, hard, easy };

MaskStrategy mask_strategy_from_string(const std::string& s);
std::string to_string(MaskStrategy strategy);

// Negative-masking request: keep `negatives_per_positive` negatives per
// positive (a 1:k target ratio). Positives are never masked.
struct MaskSpec {
  MaskStrategy strategy = MaskStrategy::none;
  double negatives_per_positive = 16.0;
  std::uint64_t seed = 0;
};

struct PairMask {
  std::size_t n = 0;
  std::vector<std::uint8_t> keep;  // row-major n*n

  bool at(std::size_t i, std::size_t j) const { return keep[i * n + j] != 0; }
  std::size_t kept_negatives() const;
};

// +1 on the diagonal, -1 elsewhere: the label matrix for an aligned batch.
Matrix pair_label_matrix(std::size_t n);

// a * b^T with fixed-order dot products; rows of both arguments are the
// embedding vectors.
Matrix pairwise_dots(const Matrix& a, const Matrix& b);

// Pairwise sigmoid loss: every (image, text) pair is an independent binary
// classification with logit t * <x_i, y_j> + b and label +1 iff i == j.
// value = -(1/n) sum_ij log_sigmoid(z_ij * logit_ij), restricted to kept
// pairs when a mask is given (the divisor stays n).
LossOutput sigmoid_loss(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                        const PairMask* mask = nullptr);

// Analytic gradients of the sigmoid loss w.r.t. the normalized embeddings,
// t_prime and bias. With m_ij = t * <x_i, y_j> + b and
// g_ij = -(1/n) z_ij sigmoid(-z_ij m_ij) on kept pairs (0 on masked ones):
//   d_zimg_i  = t * sum_j g_ij y_j        d_bias    = sum_ij g_ij
//   d_ztxt_j  = t * sum_i g_ij x_i        d_t_prime = t * sum_ij g_ij <x_i, y_j>
LossGrads sigmoid_loss_grads(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                             const PairMask* mask = nullptr);
LossGrads sigmoid_loss_grads(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                             const MaskSpec& spec);

// Softmax contrastive baseline: cross-entropy over the similarity matrix,
// normalized independently across images and across texts, stabilized by
// max subtraction. No bias term; value is 0 for n == 1.
LossOutput softmax_loss(const Matrix& zimg, const Matrix& ztxt, double t_prime);
LossGrads softmax_loss_grads(const Matrix& zimg, const Matrix& ztxt, double t_prime);

// Build a keep-mask from the previous forward pass. All n positives are
// kept plus exactly round(n * negatives_per_positive) negatives: the
// highest-loss ones (hard), the lowest-loss ones (easy), or a seeded
// uniform sample (random). Ties break by (row, col) lexicographic order.
PairMask build_mask(const Matrix& pair_losses, const MaskSpec& spec);

// Sum of kept pair losses divided by n (same summation order as the loss).
double masked_loss_value(const Matrix& pair_losses, const PairMask& mask);

// Throws ShapeMismatch / NotNormalized unless both batches are the same
// n x d shape with unit rows (tolerance 1e-6 on the norms).
void check_embedding_batch(const Matrix& zimg, const Matrix& ztxt);

namespace detail {

struct PairTerm {
  double loss;  // -log_sigmoid(z * logit), >= 0
  double g;     // dL/dlogit, already scaled by 1/n
};

// Shared between the monolithic and chunked evaluators so that identical
// pairs produce bit-identical terms.
inline PairTerm sigmoid_pair_term(double logit, bool positive, double inv_n) {
  double z = positive ? 1.0 : -1.0;
  double zl = z * logit;
  return PairTerm{-log_sigmoid(zl), -(z * sigmoid(-zl)) * inv_n};
}

}  // namespace detail

}  // namespace siglab
