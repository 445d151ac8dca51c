#include "siglab/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "siglab/rng.hpp"

namespace siglab {

std::size_t PairMask::kept_negatives() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && at(i, j)) ++count;
    }
  }
  return count;
}

Matrix pair_label_matrix(std::size_t n) {
  Matrix labels(n, n, -1.0);
  for (std::size_t i = 0; i < n; ++i) labels(i, i) = 1.0;
  return labels;
}

Matrix pairwise_dots(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeMismatch("pairwise_dots: embedding dims differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      out(i, j) = dot(a.row_ptr(i), b.row_ptr(j), a.cols());
    }
  }
  return out;
}

void check_embedding_batch(const Matrix& zimg, const Matrix& ztxt) {
  if (zimg.rows() == 0 || zimg.cols() == 0) throw ShapeMismatch("empty embedding batch");
  if (!zimg.same_shape(ztxt)) {
    throw ShapeMismatch("image batch " + std::to_string(zimg.rows()) + "x" +
                        std::to_string(zimg.cols()) + " vs text batch " +
                        std::to_string(ztxt.rows()) + "x" + std::to_string(ztxt.cols()));
  }
  for (const Matrix* m : {&zimg, &ztxt}) {
    for (std::size_t i = 0; i < m->rows(); ++i) {
      double norm = std::sqrt(dot(m->row_ptr(i), m->row_ptr(i), m->cols()));
      if (std::abs(norm - 1.0) > 1e-6) {
        throw NotNormalized("row " + std::to_string(i) + " has norm " + std::to_string(norm));
      }
    }
  }
}

LossOutput sigmoid_loss(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                        const PairMask* mask) {
  check_embedding_batch(zimg, ztxt);
  const std::size_t n = zimg.rows();
  if (mask && mask->n != n) throw ShapeMismatch("mask size does not match batch");
  const double t = params.temperature();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossOutput out;
  out.pair_losses = Matrix(n, n);
  KahanSum total;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double logit = t * dot(zimg.row_ptr(i), ztxt.row_ptr(j), zimg.cols()) + params.bias;
      auto term = detail::sigmoid_pair_term(logit, i == j, inv_n);
      out.pair_losses(i, j) = term.loss;
      if (!mask || mask->at(i, j)) total.add(term.loss);
      if (i == j) {
        pos_sum += logit;
      } else {
        neg_sum += logit;
      }
    }
  }
  out.value = total.value() / static_cast<double>(n);
  out.positive_logit_mean = pos_sum / static_cast<double>(n);
  out.negative_logit_mean = n > 1 ? neg_sum / static_cast<double>(n * n - n) : 0.0;
  return out;
}

LossGrads sigmoid_loss_grads(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                             const PairMask* mask) {
  check_embedding_batch(zimg, ztxt);
  const std::size_t n = zimg.rows();
  const std::size_t d = zimg.cols();
  if (mask && mask->n != n) throw ShapeMismatch("mask size does not match batch");
  const double t = params.temperature();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGrads grads;
  grads.d_zimg = Matrix(n, d);
  grads.d_ztxt = Matrix(n, d);
  KahanSum bias_sum;
  KahanSum tp_sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !mask->at(i, j)) continue;
      double s = dot(zimg.row_ptr(i), ztxt.row_ptr(j), d);
      double logit = t * s + params.bias;
      double g = detail::sigmoid_pair_term(logit, i == j, inv_n).g;
      double w = t * g;
      for (std::size_t k = 0; k < d; ++k) {
        grads.d_zimg(i, k) += w * ztxt(j, k);
        grads.d_ztxt(j, k) += w * zimg(i, k);
      }
      bias_sum.add(g);
      tp_sum.add(g * s);
    }
  }
  grads.d_bias = bias_sum.value();
  grads.d_t_prime = t * tp_sum.value();
  return grads;
}

LossGrads sigmoid_loss_grads(const Matrix& zimg, const Matrix& ztxt, const LossParams& params,
                             const MaskSpec& spec) {
  if (spec.strategy == MaskStrategy::none) {
    return sigmoid_loss_grads(zimg, ztxt, params, static_cast<const PairMask*>(nullptr));
  }
  LossOutput forward = sigmoid_loss(zimg, ztxt, params);
  PairMask mask = build_mask(forward.pair_losses, spec);
  return sigmoid_loss_grads(zimg, ztxt, params, &mask);
}

LossOutput softmax_loss(const Matrix& zimg, const Matrix& ztxt, double t_prime) {
  check_embedding_batch(zimg, ztxt);
  const std::size_t n = zimg.rows();
  const double t = std::exp(t_prime);

  Matrix logits = scale(pairwise_dots(zimg, ztxt), t);
  Matrix img2txt = row_log_softmax(logits);             // normalize across texts
  Matrix txt2img = row_log_softmax(transpose(logits));  // normalize across images

  LossOutput out;
  out.pair_losses = Matrix(n, n);
  KahanSum diag;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.pair_losses(i, j) = -0.5 * (img2txt(i, j) + txt2img(j, i));
      if (i == j) {
        pos_sum += logits(i, j);
      } else {
        neg_sum += logits(i, j);
      }
    }
    diag.add(out.pair_losses(i, i));
  }
  out.value = diag.value() / static_cast<double>(n);
  out.positive_logit_mean = pos_sum / static_cast<double>(n);
  out.negative_logit_mean = n > 1 ? neg_sum / static_cast<double>(n * n - n) : 0.0;
  return out;
}

LossGrads softmax_loss_grads(const Matrix& zimg, const Matrix& ztxt, double t_prime) {
  check_embedding_batch(zimg, ztxt);
  const std::size_t n = zimg.rows();
  const std::size_t d = zimg.cols();
  const double t = std::exp(t_prime);

  Matrix logits = scale(pairwise_dots(zimg, ztxt), t);
  Matrix img2txt = row_log_softmax(logits);
  Matrix txt2img = row_log_softmax(transpose(logits));

  // dL/dlogit = -(1/2n) * (2I - row_softmax - col_softmax)
  Matrix g(n, n);
  const double c = -0.5 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double target = i == j ? 2.0 : 0.0;
      g(i, j) = c * (target - std::exp(img2txt(i, j)) - std::exp(txt2img(j, i)));
    }
  }

  LossGrads grads;
  grads.d_zimg = Matrix(n, d);
  grads.d_ztxt = Matrix(n, d);
  KahanSum tp_sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double w = t * g(i, j);
      for (std::size_t k = 0; k < d; ++k) {
        grads.d_zimg(i, k) += w * ztxt(j, k);
        grads.d_ztxt(j, k) += w * zimg(i, k);
      }
      tp_sum.add(g(i, j) * logits(i, j));  // dlogit/dt_prime = logit
    }
  }
  grads.d_t_prime = tp_sum.value();
  grads.d_bias = 0.0;
  return grads;
}

PairMask build_mask(const Matrix& pair_losses, const MaskSpec& spec) {
  if (pair_losses.rows() != pair_losses.cols() || pair_losses.rows() == 0) {
    throw ShapeMismatch("pair_losses must be square and non-empty");
  }
  const std::size_t n = pair_losses.rows();

  PairMask mask;
  mask.n = n;
  if (spec.strategy == MaskStrategy::none) {
    mask.keep.assign(n * n, 1);
    return mask;
  }

  if (spec.negatives_per_positive < 1.0 ||
      spec.negatives_per_positive > static_cast<double>(n - 1)) {
    throw InvalidRatio("negatives_per_positive " + std::to_string(spec.negatives_per_positive) +
                       " outside [1, " + std::to_string(n - 1) + "]");
  }
  const auto k = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.negatives_per_positive));

  mask.keep.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) mask.keep[i * n + i] = 1;  // positives always kept

  std::vector<std::size_t> negatives;
  negatives.reserve(n * n - n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) negatives.push_back(i * n + j);
    }
  }

  switch (spec.strategy) {
    case MaskStrategy::random: {
      RngStream rng(spec.seed, 0x6d61736bull);  // "mask"
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.next_index(negatives.size() - i);
        std::swap(negatives[i], negatives[j]);
      }
      break;
    }
    case MaskStrategy::hard:
      std::sort(negatives.begin(), negatives.end(), [&](std::size_t a, std::size_t b) {
        double la = pair_losses.data()[a];
        double lb = pair_losses.data()[b];
        return std::tie(lb, a) < std::tie(la, b);  // loss desc, (row, col) asc
      });
      break;
    case MaskStrategy::easy:
      std::sort(negatives.begin(), negatives.end(), [&](std::size_t a, std::size_t b) {
        double la = pair_losses.data()[a];
        double lb = pair_losses.data()[b];
        return std::tie(la, a) < std::tie(lb, b);  // loss asc, (row, col) asc
      });
      break;
    case MaskStrategy::none:
      break;
  }
  for (std::size_t i = 0; i < k; ++i) mask.keep[negatives[i]] = 1;
  return mask;
}

double masked_loss_value(const Matrix& pair_losses, const PairMask& mask) {
  const std::size_t n = pair_losses.rows();
  if (mask.n != n) throw ShapeMismatch("mask size does not match pair_losses");
  KahanSum total;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (mask.at(i, j)) total.add(pair_losses(i, j));
    }
  }
  return total.value() / static_cast<double>(n);
}

MaskStrategy mask_strategy_from_string(const std::string& s) {
  if (s == "none") return MaskStrategy::none;
  if (s == "random") return MaskStrategy::random;
  if (s == "hard") return MaskStrategy::hard;
  if (s == "easy") return MaskStrategy::easy;
  throw ConfigError("unknown mask strategy '" + s + "'");
}

std::string to_string(MaskStrategy strategy) {
  switch (strategy) {
    case MaskStrategy::none: return "none";
    case MaskStrategy::random: return "random";
    case MaskStrategy::hard: return "hard";
    case MaskStrategy::easy: return "easy";
  }
  return "none";
}

}  // namespace siglab
