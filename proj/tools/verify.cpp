#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "siglab/chunked.hpp"
#include "siglab/data.hpp"
#include "siglab/errors.hpp"
#include "siglab/harness.hpp"
#include "siglab/loss.hpp"
#include "siglab/matrix.hpp"
#include "siglab/model.hpp"
#include "siglab/optim.hpp"
#include "siglab/rng.hpp"

namespace siglab_cli {

namespace {

using namespace siglab;

// Test hook: added to the analytic bias gradient before comparisons.
double g_bias_nudge = 0.0;

bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Matrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix m(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      m(r, c) = rng.next_normal();
    }
  }
  return l2_normalize_rows(m);
}

// Orthogonal-dots batch: images live in the first n axes of R^{2n},
// texts in the last n, so every pairwise dot is exactly 0.
Matrix ortho_images(std::size_t n) {
  Matrix m(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix ortho_texts(std::size_t n) {
  Matrix m(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) m(i, n + i) = 1.0;
  return m;
}

// Term-by-term evaluation of the pairwise loss, usable on arbitrary
// (unchecked) inputs so finite differences can perturb single entries.
double sigmoid_oracle(const Matrix& zi, const Matrix& zt, double t_prime, double bias) {
  const std::size_t n = zi.rows();
  const double t = std::exp(t_prime);
  KahanSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = dot(zi.row_ptr(i), zt.row_ptr(j), zi.cols());
      const double z = i == j ? 1.0 : -1.0;
      acc.add(-log_sigmoid(z * (t * s + bias)));
    }
  }
  return acc.value() / static_cast<double>(n);
}

// Long-double softmax reference with max subtraction.
double softmax_oracle(const Matrix& zi, const Matrix& zt, double t_prime) {
  const std::size_t n = zi.rows();
  const long double t = expl(static_cast<long double>(t_prime));
  std::vector<long double> logits(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0.0L;
      for (std::size_t c = 0; c < zi.cols(); ++c) {
        s += static_cast<long double>(zi(i, c)) * static_cast<long double>(zt(j, c));
      }
      logits[i * n + j] = t * s;
    }
  }
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double mx = logits[i * n];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, logits[i * n + j]);
    long double lse = 0.0L;
    for (std::size_t j = 0; j < n; ++j) lse += expl(logits[i * n + j] - mx);
    total += logits[i * n + i] - mx - logl(lse);
  }
  for (std::size_t j = 0; j < n; ++j) {
    long double mx = logits[j];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i * n + j]);
    long double lse = 0.0L;
    for (std::size_t i = 0; i < n; ++i) lse += expl(logits[i * n + j] - mx);
    total += logits[j * n + j] - mx - logl(lse);
  }
  return static_cast<double>(-total / (2.0L * static_cast<long double>(n)));
}

bool check_log_sigmoid_values(std::string& why) {
  if (!close_abs(log_sigmoid(0.0), -0.6931471805599453, 1e-15)) {
    why = "log_sigmoid(0) deviates from -log 2";
    return false;
  }
  if (!close_rel(log_sigmoid(-10.0), -10.000045398899216865, 1e-13)) {
    why = "log_sigmoid(-10) deviates from reference";
    return false;
  }
  if (!close_rel(log_sigmoid(10.0), -4.5398899216864647e-05, 1e-13)) {
    why = "log_sigmoid(10) deviates from reference";
    return false;
  }
  return true;
}

bool check_ortho_loss(std::string& why) {
  const LossParams defaults;
  const double v16 = sigmoid_loss(ortho_images(16), ortho_texts(16), defaults).value;
  if (!close_abs(v16, 10.000726382387469834, 1e-12)) {
    why = "n=16 orthogonal batch loss is " + std::to_string(v16);
    return false;
  }
  const double v32 = sigmoid_loss(ortho_images(32), ortho_texts(32), defaults).value;
  if (!close_abs(v32, 10.001452764774939669, 1e-12)) {
    why = "n=32 orthogonal batch loss is " + std::to_string(v32);
    return false;
  }
  return true;
}

bool check_bias_grad_closed_form(std::string& why) {
  const Matrix zi = ortho_images(16);
  const Matrix zt = ortho_texts(16);
  const double db_neg10 =
      sigmoid_loss_grads(zi, zt, LossParams{kDefaultTPrime, -10.0}).d_bias + g_bias_nudge;
  if (!close_abs(db_neg10, -0.9992736341007611, 1e-12)) {
    why = "d_bias at b=-10 is " + std::to_string(db_neg10);
    return false;
  }
  const double db_zero =
      sigmoid_loss_grads(zi, zt, LossParams{kDefaultTPrime, 0.0}).d_bias + g_bias_nudge;
  if (!close_abs(db_zero, 7.0, 1e-12)) {
    why = "d_bias at b=0 is " + std::to_string(db_zero);
    return false;
  }
  if (!(std::abs(db_neg10) < std::abs(db_zero))) {
    why = "bias init -10 does not shrink the initial bias gradient";
    return false;
  }
  return true;
}

bool check_sigmoid_fd(std::string& why) {
  const std::size_t n = 6, d = 5;
  const Matrix zi = random_unit_rows(n, d, 11);
  const Matrix zt = random_unit_rows(n, d, 12);
  const LossParams params{0.4, -1.3};
  LossGrads lg = sigmoid_loss_grads(zi, zt, params);
  lg.d_bias += g_bias_nudge;
  const double h = 1e-5;

  const double fd_tp = (sigmoid_oracle(zi, zt, params.t_prime + h, params.bias) -
                        sigmoid_oracle(zi, zt, params.t_prime - h, params.bias)) /
                       (2 * h);
  if (!close_rel(lg.d_t_prime, fd_tp, 1e-6)) {
    why = "d_t_prime disagrees with finite differences";
    return false;
  }
  const double fd_b = (sigmoid_oracle(zi, zt, params.t_prime, params.bias + h) -
                       sigmoid_oracle(zi, zt, params.t_prime, params.bias - h)) /
                      (2 * h);
  if (!close_rel(lg.d_bias, fd_b, 1e-6)) {
    why = "d_bias disagrees with finite differences";
    return false;
  }
  Matrix pi = zi;
  Matrix pt = zt;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double keep_i = pi(r, c);
      pi(r, c) = keep_i + h;
      const double up = sigmoid_oracle(pi, zt, params.t_prime, params.bias);
      pi(r, c) = keep_i - h;
      const double dn = sigmoid_oracle(pi, zt, params.t_prime, params.bias);
      pi(r, c) = keep_i;
      if (!close_rel(lg.d_zimg(r, c), (up - dn) / (2 * h), 1e-6)) {
        why = "d_zimg disagrees with finite differences";
        return false;
      }
      const double keep_t = pt(r, c);
      pt(r, c) = keep_t + h;
      const double tu = sigmoid_oracle(zi, pt, params.t_prime, params.bias);
      pt(r, c) = keep_t - h;
      const double td = sigmoid_oracle(zi, pt, params.t_prime, params.bias);
      pt(r, c) = keep_t;
      if (!close_rel(lg.d_ztxt(r, c), (tu - td) / (2 * h), 1e-6)) {
        why = "d_ztxt disagrees with finite differences";
        return false;
      }
    }
  }
  return true;
}

bool check_sigmoid_oracle_value(std::string& why) {
  const Matrix zi = random_unit_rows(8, 6, 21);
  const Matrix zt = random_unit_rows(8, 6, 22);
  const LossParams params;
  const LossOutput out = sigmoid_loss(zi, zt, params);
  if (!close_abs(out.value, sigmoid_oracle(zi, zt, params.t_prime, params.bias), 1e-12)) {
    why = "value disagrees with the scalar-loop oracle";
    return false;
  }
  KahanSum acc;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) acc.add(out.pair_losses(i, j));
  }
  if (acc.value() / 8.0 != out.value) {
    why = "value is not exactly the pair-loss sum over n";
    return false;
  }
  const double swapped = sigmoid_loss(zt, zi, params).value;
  if (!close_abs(out.value, swapped, 1e-12)) {
    why = "loss is not symmetric under swapping the towers";
    return false;
  }
  return true;
}

bool check_softmax_closed_form(std::string& why) {
  Matrix zi = Matrix::identity(2);
  Matrix zt = Matrix::identity(2);
  const double v1 = softmax_loss(zi, zt, std::log(1.0)).value;
  if (!close_abs(v1, 0.31326168751822284, 1e-13)) {
    why = "2x2 case at s=1 is " + std::to_string(v1);
    return false;
  }
  const double v35 = softmax_loss(zi, zt, std::log(3.5)).value;
  if (!close_abs(v35, 0.029750418272620565, 1e-13)) {
    why = "2x2 case at s=3.5 is " + std::to_string(v35);
    return false;
  }
  return true;
}

bool check_softmax_fd(std::string& why) {
  const std::size_t n = 6, d = 5;
  const Matrix zi = random_unit_rows(n, d, 31);
  const Matrix zt = random_unit_rows(n, d, 32);
  const double tp = 0.7;
  const LossGrads lg = softmax_loss_grads(zi, zt, tp);
  const double h = 1e-5;

  const double fd_tp = (softmax_oracle(zi, zt, tp + h) - softmax_oracle(zi, zt, tp - h)) / (2 * h);
  if (!close_rel(lg.d_t_prime, fd_tp, 1e-6)) {
    why = "softmax d_t_prime disagrees with finite differences";
    return false;
  }
  if (lg.d_bias != 0.0) {
    why = "softmax d_bias is not fixed at 0";
    return false;
  }
  Matrix pi = zi;
  Matrix pt = zt;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double keep_i = pi(r, c);
      pi(r, c) = keep_i + h;
      const double up = softmax_oracle(pi, zt, tp);
      pi(r, c) = keep_i - h;
      const double dn = softmax_oracle(pi, zt, tp);
      pi(r, c) = keep_i;
      if (!close_rel(lg.d_zimg(r, c), (up - dn) / (2 * h), 1e-6)) {
        why = "softmax d_zimg disagrees with finite differences";
        return false;
      }
      const double keep_t = pt(r, c);
      pt(r, c) = keep_t + h;
      const double tu = softmax_oracle(zi, pt, tp);
      pt(r, c) = keep_t - h;
      const double td = softmax_oracle(zi, pt, tp);
      pt(r, c) = keep_t;
      if (!close_rel(lg.d_ztxt(r, c), (tu - td) / (2 * h), 1e-6)) {
        why = "softmax d_ztxt disagrees with finite differences";
        return false;
      }
    }
  }
  const LossGrads sym = softmax_loss_grads(zi, zi, tp);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      if (!close_abs(sym.d_zimg(r, c), sym.d_ztxt(r, c), 1e-12)) {
        why = "symmetric batch grads are not equal across towers";
        return false;
      }
    }
  }
  return true;
}

bool check_softmax_oracle(std::string& why) {
  const Matrix zi = random_unit_rows(8, 6, 41);
  const Matrix zt = random_unit_rows(8, 6, 42);
  if (!close_abs(softmax_loss(zi, zt, kDefaultTPrime).value,
                 softmax_oracle(zi, zt, kDefaultTPrime), 1e-12)) {
    why = "softmax value disagrees with the long-double oracle";
    return false;
  }
  // Hot temperature and an all-equal batch stress the stabilization.
  const double hot = std::log(1e4);
  const double v_hot = softmax_loss(zi, zt, hot).value;
  if (!std::isfinite(v_hot) || !close_abs(v_hot, softmax_oracle(zi, zt, hot), 1e-9)) {
    why = "t=1e4 softmax value diverges from the long-double oracle";
    return false;
  }
  Matrix same(4, 3);
  for (std::size_t r = 0; r < 4; ++r) same(r, 0) = 1.0;
  const double v_same = softmax_loss(same, same, hot).value;
  if (!std::isfinite(v_same) || !close_abs(v_same, softmax_oracle(same, same, hot), 1e-9)) {
    why = "all-equal batch softmax value diverges from the long-double oracle";
    return false;
  }
  return true;
}

bool check_chunked_vs_monolithic(std::string& why) {
  const std::size_t n = 8, d = 6;
  const Matrix zi = random_unit_rows(n, d, 51);
  const Matrix zt = random_unit_rows(n, d, 52);
  const LossParams params;
  const double mono_value = sigmoid_loss(zi, zt, params).value;
  const LossGrads mono = sigmoid_loss_grads(zi, zt, params);

  const ChunkedResult one = chunked_sigmoid_loss(make_shard_plan(n, 1), zi, zt, params);
  if (std::memcmp(&one.value, &mono_value, sizeof(double)) != 0 ||
      std::memcmp(one.grads.d_zimg.data().data(), mono.d_zimg.data().data(), n * d * sizeof(double)) != 0 ||
      std::memcmp(one.grads.d_ztxt.data().data(), mono.d_ztxt.data().data(), n * d * sizeof(double)) != 0 ||
      std::memcmp(&one.grads.d_bias, &mono.d_bias, sizeof(double)) != 0 ||
      std::memcmp(&one.grads.d_t_prime, &mono.d_t_prime, sizeof(double)) != 0) {
    why = "single-device evaluation is not bit-identical to monolithic";
    return false;
  }
  for (std::size_t dev : {std::size_t{2}, std::size_t{4}}) {
    const ChunkedResult res = chunked_sigmoid_loss(make_shard_plan(n, dev), zi, zt, params);
    if (!close_abs(res.value, mono_value, 1e-10) ||
        !close_abs(res.grads.d_bias, mono.d_bias, 1e-10) ||
        !close_abs(res.grads.d_t_prime, mono.d_t_prime, 1e-10)) {
      why = "chunked scalars deviate at D=" + std::to_string(dev);
      return false;
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        if (!close_abs(res.grads.d_zimg(r, c), mono.d_zimg(r, c), 1e-10) ||
            !close_abs(res.grads.d_ztxt(r, c), mono.d_ztxt(r, c), 1e-10)) {
          why = "chunked gradients deviate at D=" + std::to_string(dev);
          return false;
        }
      }
    }
    if (res.stats.permutes_executed != dev * (dev - 1)) {
      why = "permute count is not D(D-1)";
      return false;
    }
  }
  return true;
}

bool check_allgather_vs_chunked(std::string& why) {
  const std::size_t n = 8, d = 6;
  const Matrix zi = random_unit_rows(n, d, 61);
  const Matrix zt = random_unit_rows(n, d, 62);
  const LossParams params;
  for (std::size_t dev : {std::size_t{2}, std::size_t{4}}) {
    const ShardPlan plan = make_shard_plan(n, dev);
    const ChunkedResult ch = chunked_sigmoid_loss(plan, zi, zt, params);
    const ChunkedResult ag = allgather_sigmoid_loss(plan, zi, zt, params);
    if (!close_abs(ch.value, ag.value, 1e-10)) {
      why = "strategies disagree on the loss value";
      return false;
    }
    const std::size_t b = plan.per_device;
    if (ch.stats.floats_transferred != dev * (dev - 1) * b * d ||
        ag.stats.floats_transferred != 2 * dev * (dev - 1) * b * d ||
        ch.stats.floats_transferred >= ag.stats.floats_transferred) {
      why = "transfer accounting is off";
      return false;
    }
    if (ch.stats.peak_similarity_entries_per_device != b * b ||
        ag.stats.peak_similarity_entries_per_device != b * n) {
      why = "peak similarity accounting is off";
      return false;
    }
  }
  return true;
}

bool check_encoder_end_to_end(std::string& why) {
  const std::size_t n = 4;
  RngStream rng(71);
  MlpEncoder tower = make_mlp({3, 4, 3}, rng);
  Matrix x(n, 3);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.next_normal();
  }
  const Matrix texts = random_unit_rows(n, 3, 72);
  const LossParams params{0.3, -0.5};

  auto loss_of = [&]() {
    return sigmoid_loss(l2_normalize_rows(forward(tower, x)), texts, params).value;
  };
  ForwardCache cache;
  const Matrix raw = forward(tower, x, &cache);
  const Matrix zimg = l2_normalize_rows(raw);
  const LossGrads lg = sigmoid_loss_grads(zimg, texts, params);
  const NormalizeResult nr = normalize_with_grad(raw, lg.d_zimg);
  const MlpGrads mg = backward(tower, cache, nr.d_raw);

  const double h = 1e-5;
  for (std::size_t l = 0; l < tower.n_layers(); ++l) {
    for (std::size_t r = 0; r < tower.weights[l].rows(); ++r) {
      for (std::size_t c = 0; c < tower.weights[l].cols(); ++c) {
        const double keep = tower.weights[l](r, c);
        tower.weights[l](r, c) = keep + h;
        const double up = loss_of();
        tower.weights[l](r, c) = keep - h;
        const double dn = loss_of();
        tower.weights[l](r, c) = keep;
        if (!close_rel(mg.d_weights[l](r, c), (up - dn) / (2 * h), 1e-6)) {
          why = "weight gradient fails the end-to-end finite-difference check";
          return false;
        }
      }
    }
    for (std::size_t c = 0; c < tower.biases[l].cols(); ++c) {
      const double keep = tower.biases[l](0, c);
      tower.biases[l](0, c) = keep + h;
      const double up = loss_of();
      tower.biases[l](0, c) = keep - h;
      const double dn = loss_of();
      tower.biases[l](0, c) = keep;
      if (!close_rel(mg.d_biases[l](0, c), (up - dn) / (2 * h), 1e-6)) {
        why = "bias gradient fails the end-to-end finite-difference check";
        return false;
      }
    }
  }
  return true;
}

bool check_pooled_embedding_grads(std::string& why) {
  RngStream rng(81);
  BottleneckEmbedding be = make_bottleneck(10, 3, 4, rng);
  TokenBatch tokens;
  tokens.n = 3;
  tokens.len = 4;
  tokens.ids = {5, 5, 7, 0,
                3, 0, 0, 0,
                0, 0, 0, 0};
  Matrix weights(3, 4);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) weights(r, c) = rng.next_normal();
  }
  auto scalar_of = [&]() {
    const Matrix pooled = pooled_embed(be, tokens);
    double acc = 0.0;
    for (std::size_t r = 0; r < pooled.rows(); ++r) {
      for (std::size_t c = 0; c < pooled.cols(); ++c) acc += weights(r, c) * pooled(r, c);
    }
    return acc;
  };
  PoolCache cache;
  pooled_embed(be, tokens, &cache);
  const PoolGrads pg = pooled_embed_backward(be, cache, weights);

  const double h = 1e-5;
  for (std::size_t r = 0; r < be.lookup.rows(); ++r) {
    for (std::size_t c = 0; c < be.lookup.cols(); ++c) {
      const double keep = be.lookup(r, c);
      be.lookup(r, c) = keep + h;
      const double up = scalar_of();
      be.lookup(r, c) = keep - h;
      const double dn = scalar_of();
      be.lookup(r, c) = keep;
      if (!close_rel(pg.d_lookup(r, c), (up - dn) / (2 * h), 1e-6)) {
        why = "lookup gradient fails the finite-difference check";
        return false;
      }
    }
  }
  for (std::size_t r = 0; r < be.projection.rows(); ++r) {
    for (std::size_t c = 0; c < be.projection.cols(); ++c) {
      const double keep = be.projection(r, c);
      be.projection(r, c) = keep + h;
      const double up = scalar_of();
      be.projection(r, c) = keep - h;
      const double dn = scalar_of();
      be.projection(r, c) = keep;
      if (!close_rel(pg.d_projection(r, c), (up - dn) / (2 * h), 1e-6)) {
        why = "projection gradient fails the finite-difference check";
        return false;
      }
    }
  }
  return true;
}

bool check_normalize_tangent(std::string& why) {
  RngStream rng(91);
  Matrix raw(5, 4);
  Matrix d_norm(5, 4);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      raw(r, c) = rng.next_normal() + 0.1;
      d_norm(r, c) = rng.next_normal();
    }
  }
  const NormalizeResult nr = normalize_with_grad(raw, d_norm);
  for (std::size_t r = 0; r < 5; ++r) {
    if (std::abs(dot(nr.d_raw.row_ptr(r), raw.row_ptr(r), 4)) > 1e-10) {
      why = "d_raw is not orthogonal to the raw row";
      return false;
    }
  }
  // Radial input annihilates; orthogonal input on a unit row passes through.
  Matrix radial = raw;
  const NormalizeResult rad = normalize_with_grad(raw, radial);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (std::abs(rad.d_raw(r, c)) > 1e-12) {
        why = "radial d_normalized does not vanish";
        return false;
      }
    }
  }
  Matrix unit(1, 2);
  unit(0, 0) = 1.0;
  Matrix ortho(1, 2);
  ortho(0, 1) = 0.75;
  const NormalizeResult pass = normalize_with_grad(unit, ortho);
  if (!close_abs(pass.d_raw(0, 1), 0.75, 1e-12) || !close_abs(pass.d_raw(0, 0), 0.0, 1e-12)) {
    why = "orthogonal d_normalized on a unit row is not passed through";
    return false;
  }
  return true;
}

bool check_adam_recurrence(std::string& why) {
  OptimConfig cfg;
  cfg.weight_decay = 0.0;
  const double lr = 0.1;
  Matrix theta(1, 1);
  theta(0, 0) = 0.5;
  std::vector<ParamGroup> groups(1);
  groups[0].name = "scalar";
  groups[0].params = {&theta};
  AdamState state = make_adam_state(groups);

  double ref = 0.5, m = 0.0, v = 0.0;
  const double gs[3] = {1.0, -1.0, 1.0};
  for (int s = 0; s < 3; ++s) {
    GroupGrads grads(1);
    grads[0].emplace_back(1, 1);
    grads[0][0](0, 0) = gs[s];
    adam_step(state, groups, grads, lr, cfg);

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * gs[s];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * gs[s] * gs[s];
    const double t = static_cast<double>(s + 1);
    const double m_hat = m / (1.0 - std::pow(cfg.beta1, t));
    const double v_hat = v / (1.0 - std::pow(cfg.beta2, t));
    ref -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + 0.0 * ref);
    if (!close_abs(theta(0, 0), ref, 1e-15)) {
      why = "update at step " + std::to_string(s) + " deviates from the scalar recurrence";
      return false;
    }
  }

  // First-step magnitude: bias correction makes it -lr * g / (|g| + eps).
  Matrix fresh(1, 1);
  fresh(0, 0) = 1.0;
  groups[0].params = {&fresh};
  AdamState st2 = make_adam_state(groups);
  GroupGrads g2(1);
  g2[0].emplace_back(1, 1);
  g2[0][0](0, 0) = 0.5;
  adam_step(st2, groups, g2, lr, cfg);
  if (!close_abs(fresh(0, 0), 1.0 - lr * (0.5 / (0.5 + cfg.eps)), 1e-12)) {
    why = "first-step magnitude is not the bias-corrected unit step";
    return false;
  }

  // Decay-only: zero grads shrink the weight geometrically, exactly.
  OptimConfig dc;
  dc.weight_decay = 0.01;
  Matrix w(1, 1);
  w(0, 0) = 2.0;
  groups[0].params = {&w};
  AdamState st3 = make_adam_state(groups);
  double wref = 2.0;
  for (int s = 0; s < 3; ++s) {
    GroupGrads gz(1);
    gz[0].emplace_back(1, 1);
    adam_step(st3, groups, gz, lr, dc);
    wref -= lr * (0.0 + dc.weight_decay * wref);
    if (w(0, 0) != wref) {
      why = "decoupled decay is not exactly geometric";
      return false;
    }
  }
  return true;
}

bool check_schedule(std::string& why) {
  Schedule s{ScheduleKind::warmup_cosine, 100, 1100, 1.0};
  if (lr_at(s, 0) != 0.0 || lr_at(s, 100) != 1.0) {
    why = "warmup endpoints are off";
    return false;
  }
  if (!close_abs(lr_at(s, 600), 0.5, 1e-12) || !close_abs(lr_at(s, 1100), 0.0, 1e-12)) {
    why = "cosine decay midpoint or endpoint is off";
    return false;
  }
  if (!close_abs(lr_at(s, 99), 0.99, 1e-12)) {
    why = "ramp is not linear";
    return false;
  }
  s.kind = ScheduleKind::warmup_linear;
  if (!close_abs(lr_at(s, 600), 0.5, 1e-12) || lr_at(s, 1100) != 0.0) {
    why = "linear decay is off";
    return false;
  }
  s.kind = ScheduleKind::constant;
  if (lr_at(s, 1100) != 1.0) {
    why = "constant schedule decays";
    return false;
  }
  bool threw = false;
  try {
    lr_at(s, 1101);
  } catch (const StepOutOfRange&) {
    threw = true;
  }
  if (!threw) {
    why = "steps beyond the schedule are not rejected";
    return false;
  }
  return true;
}

bool check_mask_vs_sort_oracle(std::string& why) {
  const std::size_t n = 5;
  RngStream rng(101);
  Matrix losses(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) losses(i, j) = rng.next_double();
  }
  struct Neg {
    double loss;
    std::size_t idx;
  };
  std::vector<Neg> negs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) negs.push_back({losses(i, j), i * n + j});
    }
  }
  for (MaskStrategy strat : {MaskStrategy::hard, MaskStrategy::easy}) {
    MaskSpec spec{strat, 1.0, 0};
    const PairMask mask = build_mask(losses, spec);
    if (mask.kept_negatives() != n) {
      why = "1:1 mask does not keep n negatives";
      return false;
    }
    std::vector<Neg> sorted = negs;
    std::sort(sorted.begin(), sorted.end(), [&](const Neg& a, const Neg& b) {
      if (a.loss != b.loss) {
        return strat == MaskStrategy::hard ? a.loss > b.loss : a.loss < b.loss;
      }
      return a.idx < b.idx;
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask.keep[sorted[i].idx]) {
        why = "kept set disagrees with the full-sort oracle";
        return false;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask.at(i, i)) {
        why = "a positive was masked";
        return false;
      }
    }
  }
  const PairMask r1 = build_mask(losses, MaskSpec{MaskStrategy::random, 2.0, 7});
  const PairMask r2 = build_mask(losses, MaskSpec{MaskStrategy::random, 2.0, 7});
  if (r1.keep != r2.keep) {
    why = "random mask is not deterministic in the seed";
    return false;
  }
  if (r1.kept_negatives() != 10) {
    why = "random mask count is not round(n * ratio)";
    return false;
  }
  return true;
}

bool check_rng_streams(std::string& why) {
  RngStream a(42), b(42);
  for (int i = 0; i < 8; ++i) {
    if (a.next_u64() != b.next_u64()) {
      why = "same seed produces different streams";
      return false;
    }
  }
  if (derive_seed(42, 1) == derive_seed(42, 2)) {
    why = "derived substreams collide";
    return false;
  }
  RngStream n(7);
  double sum = 0.0, sq = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = n.next_normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  if (std::abs(mean) > 0.05 || std::abs(var - 1.0) > 0.1) {
    why = "normal draws have off moments";
    return false;
  }
  return true;
}

bool check_dataset_oracle(std::string& why) {
  SyntheticPairSpec spec;
  const PairDataset a = generate(spec, 64, 1);
  const PairDataset b = generate(spec, 64, 1);
  if (std::memcmp(a.images.data().data(), b.images.data().data(), 64 * spec.image_dim * sizeof(double)) != 0 ||
      a.tokens.ids != b.tokens.ids || a.class_ids != b.class_ids) {
    why = "generation is not deterministic";
    return false;
  }
  // Brute-force nearest neighbor in latent space: the true partner wins.
  for (std::size_t i = 0; i < 64; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 64; ++j) {
      double dist = 0.0;
      for (std::size_t c = 0; c < spec.latent_dim; ++c) {
        const double diff = a.latents(i, c) - a.latents(j, c);
        dist += diff * diff;
      }
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    if (best != i) {
      why = "latent nearest-neighbor retrieval is not perfect";
      return false;
    }
  }
  const CorruptResult clean = corrupt(a.images, a.tokens, spec.vocab_size, CorruptionSpec{});
  if (std::memcmp(clean.images.data().data(), a.images.data().data(), 64 * spec.image_dim * sizeof(double)) != 0 ||
      clean.tokens.ids != a.tokens.ids || clean.report.images_replaced != 0) {
    why = "zero-probability corruption mutates the batch";
    return false;
  }
  CorruptionSpec all;
  all.image_noise_p = 1.0;
  const CorruptResult noisy = corrupt(a.images, a.tokens, spec.vocab_size, all);
  if (noisy.report.images_replaced != 64) {
    why = "p=1 image noise does not touch every item";
    return false;
  }
  return true;
}

bool check_grad_monitor(std::string& why) {
  GroupGrads grads(1);
  grads[0].emplace_back(1, 2);
  grads[0][0](0, 0) = 3.0;
  grads[0][0](0, 1) = 4.0;
  if (global_grad_norm(grads) != 5.0) {
    why = "global norm of (3, 4) is not 5";
    return false;
  }
  GradMonitor mon(50, 5.0);
  for (int i = 0; i < 4; ++i) {
    if (mon.update(1.0)) {
      why = "flat history flags a spike";
      return false;
    }
  }
  if (!mon.update(10.0)) {
    why = "10 over a median of 1 is not flagged at factor 5";
    return false;
  }
  if (mon.spike_count() != 1) {
    why = "spike count is off";
    return false;
  }
  return true;
}

struct NamedCheck {
  const char* name;
  bool (*fn)(std::string&);
};

const NamedCheck kChecks[] = {
    {"log_sigmoid_reference_values", check_log_sigmoid_values},
    {"orthogonal_batch_loss_closed_form", check_ortho_loss},
    {"bias_gradient_closed_form", check_bias_grad_closed_form},
    {"sigmoid_grads_vs_finite_difference", check_sigmoid_fd},
    {"sigmoid_value_vs_scalar_oracle", check_sigmoid_oracle_value},
    {"softmax_two_pair_closed_form", check_softmax_closed_form},
    {"softmax_grads_vs_finite_difference", check_softmax_fd},
    {"softmax_vs_long_double_oracle", check_softmax_oracle},
    {"chunked_matches_monolithic", check_chunked_vs_monolithic},
    {"allgather_matches_chunked", check_allgather_vs_chunked},
    {"encoder_end_to_end_grad_check", check_encoder_end_to_end},
    {"pooled_embedding_grad_check", check_pooled_embedding_grads},
    {"normalize_tangent_property", check_normalize_tangent},
    {"adam_scalar_recurrence", check_adam_recurrence},
    {"schedule_closed_forms", check_schedule},
    {"mask_selection_vs_sort_oracle", check_mask_vs_sort_oracle},
    {"rng_stream_determinism", check_rng_streams},
    {"dataset_nn_oracle_and_corruption", check_dataset_oracle},
    {"grad_monitor_spike_detection", check_grad_monitor},
};

}  // namespace

bool run_verify(bool perturb_bias_grad) {
  g_bias_nudge = perturb_bias_grad ? 1e-3 : 0.0;
  bool all_ok = true;
  for (const NamedCheck& check : kChecks) {
    std::string why;
    bool ok = false;
    try {
      ok = check.fn(why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (ok) {
      std::printf("[ ok ] %s\n", check.name);
    } else {
      std::printf("[FAIL] %s: %s\n", check.name, why.c_str());
      all_ok = false;
    }
  }
  std::printf("%s (%zu checks)\n", all_ok ? "verification passed" : "verification FAILED",
              std::size(kChecks));
  return all_ok;
}

}  // namespace siglab_cli
