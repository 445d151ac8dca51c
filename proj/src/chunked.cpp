#include "siglab/chunked.hpp"

#include <string>
#include <utility>

#include "siglab/errors.hpp"

namespace siglab {

ShardPlan make_shard_plan(std::size_t n_global, std::size_t n_devices) {
  if (n_devices == 0) {
    throw IndivisibleBatch("device count must be at least 1");
  }
  if (n_global == 0 || n_global % n_devices != 0) {
    throw IndivisibleBatch("batch of " + std::to_string(n_global) +
                           " does not split across " + std::to_string(n_devices) + " devices");
  }
  return ShardPlan{n_global, n_devices, n_global / n_devices};
}

std::vector<DeviceState> shard(const Matrix& zimg, const Matrix& ztxt, std::size_t n_devices) {
  check_embedding_batch(zimg, ztxt);
  ShardPlan plan = make_shard_plan(zimg.rows(), n_devices);
  const std::size_t b = plan.per_device;
  const std::size_t d = zimg.cols();

  std::vector<DeviceState> states(plan.n_devices);
  for (std::size_t k = 0; k < plan.n_devices; ++k) {
    DeviceState& st = states[k];
    st.device_id = k;
    st.resident_shard = k;
    st.local_images = Matrix(b, d);
    st.resident_texts = Matrix(b, d);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        st.local_images(r, c) = zimg(k * b + r, c);
        st.resident_texts(r, c) = ztxt(k * b + r, c);
      }
    }
    st.partial_grads.d_zimg = Matrix(b, d);
    st.partial_grads.d_ztxt = Matrix(b, d);
  }
  return states;
}

namespace {

// One b x b block: device `dev` scores its images against the resident
// text shard. Accumulates into the device partials and the shard's
// traveling text-grad buffer. The dot block is the only O(b^2) temporary.
void score_block(const ShardPlan& plan, DeviceState& st, Matrix& text_grad_buffer,
                 const LossParams& params, double inv_n, Matrix& dots,
                 KahanSum& loss_acc, KahanSum& bias_acc, KahanSum& tp_acc) {
  const std::size_t b = plan.per_device;
  const std::size_t d = st.local_images.cols();
  const double t = params.temperature();
  const std::size_t row_base = st.device_id * b;
  const std::size_t col_base = st.resident_shard * b;

  for (std::size_t li = 0; li < b; ++li) {
    for (std::size_t lj = 0; lj < b; ++lj) {
      dots(li, lj) = dot(st.local_images.row_ptr(li), st.resident_texts.row_ptr(lj), d);
    }
  }

  for (std::size_t li = 0; li < b; ++li) {
    const double* img = st.local_images.row_ptr(li);
    for (std::size_t lj = 0; lj < b; ++lj) {
      const double s = dots(li, lj);
      const double logit = t * s + params.bias;
      const bool positive = row_base + li == col_base + lj;
      const detail::PairTerm term = detail::sigmoid_pair_term(logit, positive, inv_n);
      loss_acc.add(term.loss);
      bias_acc.add(term.g);
      tp_acc.add(term.g * s);
      const double w = t * term.g;
      const double* txt = st.resident_texts.row_ptr(lj);
      double* dimg = st.partial_grads.d_zimg.row_ptr(li);
      double* dtxt = text_grad_buffer.row_ptr(lj);
      for (std::size_t c = 0; c < d; ++c) {
        dimg[c] += w * txt[c];
        dtxt[c] += w * img[c];
      }
    }
  }
}

}  // namespace

ChunkedResult chunked_sigmoid_loss(const ShardPlan& plan, const Matrix& zimg, const Matrix& ztxt,
                                   const LossParams& params) {
  std::vector<DeviceState> states = shard(zimg, ztxt, plan.n_devices);
  const std::size_t D = plan.n_devices;
  const std::size_t b = plan.per_device;
  const std::size_t n = plan.n_global;
  const std::size_t d = zimg.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  ChunkedResult out;
  out.stats.peak_similarity_entries_per_device = b * b;

  // Text-grad buffers travel with their shard; indexed by shard id.
  std::vector<Matrix> text_grads(D, Matrix(b, d));
  std::vector<KahanSum> loss_acc(D), bias_acc(D), tp_acc(D);
  Matrix dots(b, b);

  for (std::size_t round = 0; round < D; ++round) {
    if (round > 0) {
      // Neighbor permutation: device k takes over the shard held by
      // device (k+1) mod D. Each of the D shards moves once, carrying
      // its b x d texts; the grad buffer rides along unbilled.
      Matrix first_texts = std::move(states[0].resident_texts);
      std::size_t first_shard = states[0].resident_shard;
      for (std::size_t k = 0; k + 1 < D; ++k) {
        states[k].resident_texts = std::move(states[k + 1].resident_texts);
        states[k].resident_shard = states[k + 1].resident_shard;
      }
      states[D - 1].resident_texts = std::move(first_texts);
      states[D - 1].resident_shard = first_shard;
      out.stats.permutes_executed += D;
      out.stats.floats_transferred += D * b * d;
    }
    for (std::size_t k = 0; k < D; ++k) {
      score_block(plan, states[k], text_grads[states[k].resident_shard], params, inv_n, dots,
                  loss_acc[k], bias_acc[k], tp_acc[k]);
    }
  }

  // Cross-device reduction in fixed device order, then assembly. Buffers
  // return to their owners by walking the rotation backwards.
  KahanSum value_sum, bias_sum, tp_sum;
  for (std::size_t k = 0; k < D; ++k) {
    states[k].partial_loss = loss_acc[k].value();
    value_sum.add(states[k].partial_loss);
    bias_sum.add(bias_acc[k].value());
    tp_sum.add(tp_acc[k].value());
  }
  out.value = value_sum.value() / static_cast<double>(n);
  out.grads.d_bias = bias_sum.value();
  out.grads.d_t_prime = params.temperature() * tp_sum.value();
  out.grads.d_zimg = Matrix(n, d);
  out.grads.d_ztxt = Matrix(n, d);
  for (std::size_t k = 0; k < D; ++k) {
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        out.grads.d_zimg(k * b + r, c) = states[k].partial_grads.d_zimg(r, c);
        out.grads.d_ztxt(k * b + r, c) = text_grads[k](r, c);
      }
    }
  }
  return out;
}

ChunkedResult allgather_sigmoid_loss(const ShardPlan& plan, const Matrix& zimg, const Matrix& ztxt,
                                     const LossParams& params) {
  std::vector<DeviceState> states = shard(zimg, ztxt, plan.n_devices);
  const std::size_t D = plan.n_devices;
  const std::size_t b = plan.per_device;
  const std::size_t n = plan.n_global;
  const std::size_t d = zimg.cols();
  const double t = params.temperature();
  const double inv_n = 1.0 / static_cast<double>(n);

  ChunkedResult out;
  // Two all-gathers (images and texts): each device sends its shard to
  // the other D-1 devices.
  out.stats.floats_transferred = 2 * D * (D - 1) * b * d;
  out.stats.permutes_executed = 0;
  out.stats.peak_similarity_entries_per_device = b * n;

  std::vector<KahanSum> loss_acc(D), bias_acc(D), tp_acc(D);
  out.grads.d_zimg = Matrix(n, d);
  out.grads.d_ztxt = Matrix(n, d);
  Matrix row_block(b, n);
  Matrix col_block(n, b);

  for (std::size_t k = 0; k < D; ++k) {
    const std::size_t row_base = k * b;
    // Row block: local images against the full gathered text batch.
    // Yields the device's share of the loss and its image gradients.
    for (std::size_t li = 0; li < b; ++li) {
      for (std::size_t j = 0; j < n; ++j) {
        row_block(li, j) = dot(zimg.row_ptr(row_base + li), ztxt.row_ptr(j), d);
      }
    }
    for (std::size_t li = 0; li < b; ++li) {
      const std::size_t i = row_base + li;
      double* dimg = out.grads.d_zimg.row_ptr(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double s = row_block(li, j);
        const double logit = t * s + params.bias;
        const detail::PairTerm term = detail::sigmoid_pair_term(logit, i == j, inv_n);
        loss_acc[k].add(term.loss);
        bias_acc[k].add(term.g);
        tp_acc[k].add(term.g * s);
        const double w = t * term.g;
        const double* txt = ztxt.row_ptr(j);
        for (std::size_t c = 0; c < d; ++c) {
          dimg[c] += w * txt[c];
        }
      }
    }
    // Column block, after the row block is retired: the full image batch
    // against local texts, for their gradients. Loss terms would double
    // count here so only the gradient accumulates.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t lj = 0; lj < b; ++lj) {
        col_block(i, lj) = dot(zimg.row_ptr(i), ztxt.row_ptr(row_base + lj), d);
      }
    }
    for (std::size_t lj = 0; lj < b; ++lj) {
      const std::size_t j = row_base + lj;
      double* dtxt = out.grads.d_ztxt.row_ptr(j);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = col_block(i, lj);
        const double logit = t * s + params.bias;
        const detail::PairTerm term = detail::sigmoid_pair_term(logit, i == j, inv_n);
        const double w = t * term.g;
        const double* img = zimg.row_ptr(i);
        for (std::size_t c = 0; c < d; ++c) {
          dtxt[c] += w * img[c];
        }
      }
    }
  }

  KahanSum value_sum, bias_sum, tp_sum;
  for (std::size_t k = 0; k < D; ++k) {
    states[k].partial_loss = loss_acc[k].value();
    value_sum.add(states[k].partial_loss);
    bias_sum.add(bias_acc[k].value());
    tp_sum.add(tp_acc[k].value());
  }
  out.value = value_sum.value() / static_cast<double>(n);
  out.grads.d_bias = bias_sum.value();
  out.grads.d_t_prime = t * tp_sum.value();
  return out;
}

nlohmann::json stats_record(const ShardPlan& plan, const std::string& strategy,
                            const CommStats& stats) {
  return nlohmann::json{
      {"strategy", strategy},
      {"batch_size", plan.n_global},
      {"devices", plan.n_devices},
      {"per_device", plan.per_device},
      {"permutes_executed", stats.permutes_executed},
      {"floats_transferred", stats.floats_transferred},
      {"peak_similarity_entries_per_device", stats.peak_similarity_entries_per_device},
  };
}

}  // namespace siglab
