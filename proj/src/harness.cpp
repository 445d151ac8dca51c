#include "siglab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "siglab/chunked.hpp"
#include "siglab/errors.hpp"
#include "siglab/rng.hpp"

namespace siglab {

namespace {

constexpr std::uint64_t kSaltInit = 0x696e6974ull;
constexpr std::uint64_t kSaltBatch = 0x62617463ull;
constexpr std::uint64_t kSaltMask = 0x6d61736bull;
constexpr std::uint64_t kSaltCorrupt = 0x636f7272ull;
constexpr std::uint64_t kSaltPretrain = 0x70726574ull;
constexpr std::uint64_t kSaltHead = 0x68656164ull;

constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kEvalStream = 1;
constexpr std::uint64_t kPretrainStream = 2;

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Partial Fisher-Yates draw of `count` distinct indices from [0, pool).
void sample_indices(RngStream& rng, std::size_t pool, std::size_t count,
                    std::vector<std::size_t>& scratch, std::vector<std::size_t>& out) {
  scratch.resize(pool);
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_index(pool - i);
    std::swap(scratch[i], scratch[j]);
    out[i] = scratch[i];
  }
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), src.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < src.cols(); ++c) {
      out(r, c) = src(idx[r], c);
    }
  }
  return out;
}

TokenBatch gather_tokens(const TokenBatch& src, const std::vector<std::size_t>& idx) {
  TokenBatch out;
  out.n = idx.size();
  out.len = src.len;
  out.ids.resize(out.n * out.len);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t p = 0; p < src.len; ++p) {
      out.at(r, p) = src.at(idx[r], p);
    }
  }
  return out;
}

void round_params_f32(std::vector<ParamGroup>& groups) {
  for (ParamGroup& g : groups) {
    if (g.frozen) continue;
    for (Matrix* p : g.params) {
      for (std::size_t r = 0; r < p->rows(); ++r) {
        for (std::size_t c = 0; c < p->cols(); ++c) {
          (*p)(r, c) = static_cast<double>(static_cast<float>((*p)(r, c)));
        }
      }
    }
  }
}

void encoder_grads(std::vector<Matrix>& dst, MlpGrads& mg) {
  for (std::size_t l = 0; l < mg.d_weights.size(); ++l) {
    dst.push_back(std::move(mg.d_weights[l]));
    dst.push_back(std::move(mg.d_biases[l]));
  }
}

Schedule make_schedule(const RunConfig& cfg, std::size_t steps) {
  Schedule sched;
  sched.kind = cfg.schedule_kind;
  sched.total_steps = steps;
  sched.warmup_steps =
      static_cast<std::size_t>(std::llround(cfg.warmup_frac * static_cast<double>(steps)));
  sched.peak_lr = cfg.optim.base_lr;
  validate(sched);
  return sched;
}

}  // namespace

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "sigmoid") return LossKind::sigmoid;
  if (s == "softmax") return LossKind::softmax;
  throw ConfigError("unknown loss '" + s + "'");
}

std::string to_string(LossKind kind) {
  return kind == LossKind::sigmoid ? "sigmoid" : "softmax";
}

void validate(const RunConfig& cfg) {
  if (cfg.batch_size == 0) {
    throw ConfigError("batch_size must be positive");
  }
  if (cfg.total_examples_seen % cfg.batch_size != 0) {
    throw ConfigError("total_examples_seen must be a multiple of batch_size");
  }
  if (cfg.train_size == 0 || cfg.eval_size == 0) {
    throw ConfigError("train_size and eval_size must be positive");
  }
  if (cfg.batch_size > cfg.train_size) {
    throw ConfigError("batch_size exceeds train_size");
  }
  make_shard_plan(cfg.batch_size, cfg.devices);
  if (cfg.devices > 1 && cfg.loss != LossKind::sigmoid) {
    throw ConfigError("softmax loss runs on a single device");
  }
  if (cfg.devices > 1 && cfg.mask.strategy != MaskStrategy::none) {
    throw ConfigError("masking runs on a single device");
  }
  if (cfg.matched_pairs && cfg.mask.strategy == MaskStrategy::none) {
    throw ConfigError("matched_pairs needs a mask strategy");
  }
  if (cfg.mask.strategy != MaskStrategy::none) {
    const double npp = cfg.mask.negatives_per_positive;
    if (!(npp >= 1.0 && npp <= static_cast<double>(cfg.batch_size - 1))) {
      throw InvalidRatio("negatives_per_positive must lie in [1, batch_size - 1]");
    }
  }
  validate(cfg.optim);
  validate(cfg.corruption);
  validate(cfg.data);
  if (cfg.dims.image_dim != cfg.data.image_dim) {
    throw ConfigError("model image input dim must equal data image_dim");
  }
  if (cfg.dims.vocab_size != cfg.data.vocab_size) {
    throw ConfigError("model vocab must equal data vocab");
  }
  if (!(cfg.warmup_frac >= 0.0 && cfg.warmup_frac <= 1.0)) {
    throw ConfigError("warmup_frac must lie in [0, 1]");
  }
  for (std::size_t k : cfg.eval_ks) {
    if (k == 0 || k > cfg.eval_size) {
      throw ConfigError("eval k values must lie in [1, eval_size]");
    }
  }
  if (cfg.monitor_window == 0) {
    throw ConfigError("monitor window must be positive");
  }
  if (!(cfg.spike_factor > 1.0)) {
    throw ConfigError("spike_factor must exceed 1");
  }
  if (cfg.tower_mode != TowerMode::both_trainable && cfg.pretrain_steps > 0 &&
      !(cfg.pretrain_lr > 0.0)) {
    throw ConfigError("pretrain_lr must be positive");
  }
}

std::size_t planned_steps(const RunConfig& cfg) {
  const std::size_t base = cfg.total_examples_seen / cfg.batch_size;
  if (!cfg.matched_pairs || cfg.mask.strategy == MaskStrategy::none) {
    return base;
  }
  const double n = static_cast<double>(cfg.batch_size);
  const double k = static_cast<double>(std::llround(n * cfg.mask.negatives_per_positive));
  const double ratio = n * (n - 1.0) / k;
  return static_cast<std::size_t>(std::llround(static_cast<double>(base) * ratio));
}

EncodedBatch encode(const TwoTowerModel& model, const Matrix& images, const TokenBatch& tokens) {
  EncodedBatch out;
  out.zimg = l2_normalize_rows(forward(model.image_tower, images));
  Matrix pooled = pooled_embed(model.text_embed, tokens);
  out.ztxt = l2_normalize_rows(forward(model.text_tower, pooled));
  return out;
}

TrainResult train_from(const RunConfig& cfg, TwoTowerModel model) {
  validate(cfg);
  TrainResult result;
  const std::size_t steps = planned_steps(cfg);
  if (steps == 0) {
    result.model = std::move(model);
    return result;
  }

  const Schedule sched = make_schedule(cfg, steps);
  const PairDataset train_set = generate(cfg.data, cfg.train_size, kTrainStream);

  std::vector<ParamGroup> groups = param_groups(model, cfg.tower_mode);
  if (cfg.f32_params) round_params_f32(groups);
  AdamState state = make_adam_state(groups);
  GradMonitor monitor(cfg.monitor_window, cfg.spike_factor);

  RngStream batch_rng(derive_seed(cfg.seed, kSaltBatch));
  const std::uint64_t mask_base = derive_seed(cfg.seed, kSaltMask);
  const std::uint64_t corr_base = derive_seed(cfg.seed, kSaltCorrupt);

  std::vector<std::size_t> scratch, idx;
  result.trace.reserve(steps);

  for (std::size_t s = 0; s < steps; ++s) {
    sample_indices(batch_rng, cfg.train_size, cfg.batch_size, scratch, idx);
    Matrix images = gather_rows(train_set.images, idx);
    TokenBatch tokens = gather_tokens(train_set.tokens, idx);

    CorruptionSpec cs = cfg.corruption;
    cs.seed = derive_seed(corr_base, s);
    CorruptResult batch = corrupt(images, tokens, cfg.data.vocab_size, cs);

    ForwardCache img_cache;
    Matrix img_raw = forward(model.image_tower, batch.images, &img_cache);
    PoolCache pool_cache;
    Matrix pooled = pooled_embed(model.text_embed, batch.tokens, &pool_cache);
    ForwardCache txt_cache;
    Matrix txt_raw = forward(model.text_tower, pooled, &txt_cache);
    Matrix zimg = l2_normalize_rows(img_raw);
    Matrix ztxt = l2_normalize_rows(txt_raw);

    const LossParams params{model.t_prime(0, 0), model.bias(0, 0)};
    double loss_value = 0.0;
    LossGrads lg;
    if (cfg.loss == LossKind::softmax) {
      loss_value = softmax_loss(zimg, ztxt, params.t_prime).value;
      lg = softmax_loss_grads(zimg, ztxt, params.t_prime);
    } else if (cfg.devices > 1) {
      const ShardPlan plan = make_shard_plan(cfg.batch_size, cfg.devices);
      ChunkedResult cr = chunked_sigmoid_loss(plan, zimg, ztxt, params);
      loss_value = cr.value;
      lg = std::move(cr.grads);
    } else if (cfg.mask.strategy != MaskStrategy::none) {
      LossOutput full = sigmoid_loss(zimg, ztxt, params);
      MaskSpec ms = cfg.mask;
      ms.seed = derive_seed(mask_base, s);
      const PairMask mask = build_mask(full.pair_losses, ms);
      loss_value = masked_loss_value(full.pair_losses, mask);
      lg = sigmoid_loss_grads(zimg, ztxt, params, &mask);
    } else {
      loss_value = sigmoid_loss(zimg, ztxt, params).value;
      lg = sigmoid_loss_grads(zimg, ztxt, params);
    }

    NormalizeResult img_nr = normalize_with_grad(img_raw, lg.d_zimg);
    NormalizeResult txt_nr = normalize_with_grad(txt_raw, lg.d_ztxt);
    MlpGrads ig = backward(model.image_tower, img_cache, img_nr.d_raw);
    MlpGrads tg = backward(model.text_tower, txt_cache, txt_nr.d_raw);
    PoolGrads pg = pooled_embed_backward(model.text_embed, pool_cache, tg.d_input);

    GroupGrads grads(3);
    encoder_grads(grads[0], ig);
    grads[1].push_back(std::move(pg.d_lookup));
    grads[1].push_back(std::move(pg.d_projection));
    encoder_grads(grads[1], tg);
    Matrix d_tp(1, 1);
    d_tp(0, 0) = lg.d_t_prime;
    Matrix d_b(1, 1);
    d_b(0, 0) = lg.d_bias;
    grads[2].push_back(std::move(d_tp));
    grads[2].push_back(std::move(d_b));

    const double grad_norm = clip_global_norm(grads, cfg.optim.grad_clip_norm);
    const bool spike = monitor.update(grad_norm);
    const double lr_t = lr_at(sched, s);
    adam_step(state, groups, grads, lr_t, cfg.optim);
    if (cfg.f32_params) round_params_f32(groups);

    StepMetrics sm;
    sm.step = s;
    sm.lr = lr_t;
    sm.loss = loss_value;
    sm.grad_norm = grad_norm;
    sm.spike = spike;
    sm.t = std::exp(model.t_prime(0, 0));
    sm.b = model.bias(0, 0);
    result.trace.push_back(sm);
  }

  result.model = std::move(model);
  return result;
}

TrainResult train(const RunConfig& cfg) {
  validate(cfg);
  TwoTowerModel model =
      make_two_tower(cfg.dims, cfg.t_prime_init, cfg.bias_init, derive_seed(cfg.seed, kSaltInit));
  if (cfg.tower_mode != TowerMode::both_trainable) {
    pretrain_image_tower(model, cfg);
  }
  return train_from(cfg, std::move(model));
}

void pretrain_image_tower(TwoTowerModel& model, const RunConfig& cfg) {
  if (cfg.pretrain_steps == 0) return;
  const PairDataset ds = generate(cfg.data, cfg.train_size, kPretrainStream);
  const std::size_t embed = model.image_tower.output_dim();
  const std::size_t latent = cfg.data.latent_dim;

  RngStream head_rng(derive_seed(cfg.seed, kSaltHead));
  Matrix head(embed, latent);
  const double std_dev = std::sqrt(1.0 / static_cast<double>(embed));
  for (std::size_t r = 0; r < embed; ++r) {
    for (std::size_t c = 0; c < latent; ++c) {
      head(r, c) = head_rng.next_normal() * std_dev;
    }
  }

  std::vector<ParamGroup> groups(2);
  groups[0].name = "tower";
  for (std::size_t l = 0; l < model.image_tower.n_layers(); ++l) {
    groups[0].params.push_back(&model.image_tower.weights[l]);
    groups[0].params.push_back(&model.image_tower.biases[l]);
  }
  groups[1].name = "head";
  groups[1].params.push_back(&head);

  OptimConfig oc = cfg.optim;
  oc.base_lr = cfg.pretrain_lr;
  oc.weight_decay = 0.0;
  validate(oc);
  AdamState state = make_adam_state(groups);

  RngStream batch_rng(derive_seed(cfg.seed, kSaltPretrain));
  std::vector<std::size_t> scratch, idx;
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);

  for (std::size_t s = 0; s < cfg.pretrain_steps; ++s) {
    sample_indices(batch_rng, cfg.train_size, cfg.batch_size, scratch, idx);
    Matrix images = gather_rows(ds.images, idx);
    Matrix targets = gather_rows(ds.latents, idx);

    ForwardCache cache;
    Matrix emb = forward(model.image_tower, images, &cache);
    Matrix pred = matmul(emb, head);
    Matrix d_pred(pred.rows(), pred.cols());
    for (std::size_t r = 0; r < pred.rows(); ++r) {
      for (std::size_t c = 0; c < pred.cols(); ++c) {
        d_pred(r, c) = (pred(r, c) - targets(r, c)) * inv_b;
      }
    }
    Matrix d_head = matmul(transpose(emb), d_pred);
    Matrix d_emb = matmul(d_pred, transpose(head));
    MlpGrads mg = backward(model.image_tower, cache, d_emb);

    GroupGrads grads(2);
    encoder_grads(grads[0], mg);
    grads[1].push_back(std::move(d_head));
    adam_step(state, groups, grads, cfg.pretrain_lr, oc);
  }
}

EvalReport evaluate(const TwoTowerModel& model, const PairDataset& eval_set,
                    const std::vector<std::size_t>& ks, LossKind loss_kind) {
  const std::size_t n = eval_set.size();
  if (n == 0) {
    throw ConfigError("eval set is empty");
  }
  for (std::size_t k : ks) {
    if (k == 0 || k > n) {
      throw ConfigError("recall k must lie in [1, eval set size]");
    }
  }
  const EncodedBatch enc = encode(model, eval_set.images, eval_set.tokens);
  const Matrix sims = pairwise_dots(enc.zimg, enc.ztxt);

  EvalReport report;
  report.ks = ks;
  for (std::size_t k : ks) {
    std::size_t hit_i2t = 0;
    std::size_t hit_t2i = 0;
    for (std::size_t q = 0; q < n; ++q) {
      // Rank of the true partner under descending similarity, ties by
      // ascending index.
      std::size_t rank_i2t = 1;
      std::size_t rank_t2i = 1;
      const double true_sim = sims(q, q);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == q) continue;
        if (sims(q, j) > true_sim || (sims(q, j) == true_sim && j < q)) ++rank_i2t;
        if (sims(j, q) > true_sim || (sims(j, q) == true_sim && j < q)) ++rank_t2i;
      }
      if (rank_i2t <= k) ++hit_i2t;
      if (rank_t2i <= k) ++hit_t2i;
    }
    report.recall_img2txt.push_back(static_cast<double>(hit_i2t) / static_cast<double>(n));
    report.recall_txt2img.push_back(static_cast<double>(hit_t2i) / static_cast<double>(n));
  }

  // Prototype classifier: mean text embedding per class, re-normalized.
  std::uint32_t n_classes = 0;
  for (std::uint32_t c : eval_set.class_ids) n_classes = std::max(n_classes, c + 1);
  Matrix protos(n_classes, enc.ztxt.cols());
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = eval_set.class_ids[i];
    ++counts[c];
    for (std::size_t d = 0; d < enc.ztxt.cols(); ++d) {
      protos(c, d) += enc.ztxt(i, d);
    }
  }
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    double sq = 0.0;
    for (std::size_t d = 0; d < protos.cols(); ++d) {
      if (counts[c] > 0) protos(c, d) /= static_cast<double>(counts[c]);
      sq += protos(c, d) * protos(c, d);
    }
    const double norm = std::sqrt(sq);
    if (norm > 1e-30) {
      for (std::size_t d = 0; d < protos.cols(); ++d) protos(c, d) /= norm;
    }
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < n_classes; ++c) {
      const double score = dot(enc.zimg.row_ptr(i), protos.row_ptr(c), protos.cols());
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    if (best == eval_set.class_ids[i]) ++correct;
  }
  report.zero_shot_accuracy = static_cast<double>(correct) / static_cast<double>(n);

  const LossParams params{model.t_prime(0, 0), model.bias(0, 0)};
  const LossOutput sig = sigmoid_loss(enc.zimg, enc.ztxt, params);
  report.final_loss =
      loss_kind == LossKind::sigmoid ? sig.value : softmax_loss(enc.zimg, enc.ztxt, params.t_prime).value;
  report.positive_logit_mean = sig.positive_logit_mean;
  report.negative_logit_mean = sig.negative_logit_mean;
  report.final_t = params.temperature();
  report.final_b = params.bias;
  return report;
}

RunOutput run(const RunConfig& cfg) {
  RunOutput out;
  out.result = train(cfg);
  const PairDataset eval_set = generate(cfg.data, cfg.eval_size, kEvalStream);
  out.report = evaluate(out.result.model, eval_set, cfg.eval_ks, cfg.loss);
  for (const StepMetrics& sm : out.result.trace) {
    if (sm.spike) ++out.report.grad_spike_count;
  }
  return out;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "batch_size") return SweepAxis::batch_size;
  if (s == "mask") return SweepAxis::mask;
  if (s == "corruption") return SweepAxis::corruption;
  if (s == "beta2") return SweepAxis::beta2;
  if (s == "bias_init") return SweepAxis::bias_init;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::batch_size: return "batch_size";
    case SweepAxis::mask: return "mask";
    case SweepAxis::corruption: return "corruption";
    case SweepAxis::beta2: return "beta2";
    case SweepAxis::bias_init: return "bias_init";
  }
  return "batch_size";
}

CorruptionChannel corruption_channel_from_string(const std::string& s) {
  if (s == "image") return CorruptionChannel::image;
  if (s == "text") return CorruptionChannel::text;
  if (s == "align") return CorruptionChannel::align;
  if (s == "image_text") return CorruptionChannel::image_text;
  if (s == "image_text_align") return CorruptionChannel::image_text_align;
  throw ConfigError("unknown corruption channel '" + s + "'");
}

std::string to_string(CorruptionChannel channel) {
  switch (channel) {
    case CorruptionChannel::image: return "image";
    case CorruptionChannel::text: return "text";
    case CorruptionChannel::align: return "align";
    case CorruptionChannel::image_text: return "image_text";
    case CorruptionChannel::image_text_align: return "image_text_align";
  }
  return "image";
}

namespace {

void apply_channel(CorruptionSpec& cspec, CorruptionChannel channel, double p) {
  switch (channel) {
    case CorruptionChannel::image:
      cspec.image_noise_p = p;
      break;
    case CorruptionChannel::text:
      cspec.text_scramble_p = p;
      break;
    case CorruptionChannel::align:
      cspec.misalign_p = p;
      break;
    case CorruptionChannel::image_text:
      cspec.image_noise_p = p;
      cspec.text_scramble_p = p;
      break;
    case CorruptionChannel::image_text_align:
      cspec.image_noise_p = p;
      cspec.text_scramble_p = p;
      cspec.misalign_p = p;
      break;
  }
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& base, const SweepSpec& spec) {
  const bool mask_axis = spec.axis == SweepAxis::mask;
  if (mask_axis ? spec.mask_values.empty() : spec.values.empty()) {
    throw ConfigError("sweep needs at least one axis value");
  }
  if (spec.losses.empty() || spec.n_seeds == 0) {
    throw ConfigError("sweep needs at least one loss and one seed");
  }
  const std::size_t n_values = mask_axis ? spec.mask_values.size() : spec.values.size();

  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    for (LossKind loss : spec.losses) {
      for (std::size_t si = 0; si < spec.n_seeds; ++si) {
        RunConfig cfg = base;
        cfg.loss = loss;
        cfg.seed = base.seed + si;
        SweepRow row;
        row.axis = to_string(spec.axis);
        row.loss = to_string(loss);
        row.seed = cfg.seed;
        if (mask_axis) {
          cfg.mask.strategy = spec.mask_values[vi];
          row.value = to_string(spec.mask_values[vi]);
        } else {
          const double v = spec.values[vi];
          switch (spec.axis) {
            case SweepAxis::batch_size:
              cfg.batch_size = static_cast<std::size_t>(std::llround(v));
              row.value = std::to_string(cfg.batch_size);
              break;
            case SweepAxis::corruption:
              apply_channel(cfg.corruption, spec.channel, v);
              row.value = format_double(v);
              break;
            case SweepAxis::beta2:
              cfg.optim.beta2 = v;
              row.value = format_double(v);
              break;
            case SweepAxis::bias_init:
              cfg.bias_init = v;
              row.value = format_double(v);
              break;
            case SweepAxis::mask:
              break;
          }
        }
        row.report = run(cfg).report;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string trace_to_jsonl(const std::vector<StepMetrics>& trace) {
  std::string out;
  for (const StepMetrics& sm : trace) {
    nlohmann::ordered_json j{
        {"step", sm.step}, {"lr", sm.lr},       {"loss", sm.loss}, {"grad_norm", sm.grad_norm},
        {"spike", sm.spike}, {"t", sm.t},       {"b", sm.b},
    };
    out += j.dump();
    out += '\n';
  }
  return out;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json recall_i2t = nlohmann::json::object();
  nlohmann::json recall_t2i = nlohmann::json::object();
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    const std::string key = std::to_string(report.ks[i]);
    recall_i2t[key] = report.recall_img2txt[i];
    recall_t2i[key] = report.recall_txt2img[i];
  }
  return nlohmann::json{
      {"recall_img2txt", recall_i2t},
      {"recall_txt2img", recall_t2i},
      {"zero_shot_accuracy", report.zero_shot_accuracy},
      {"final_loss", report.final_loss},
      {"final_t", report.final_t},
      {"final_b", report.final_b},
      {"positive_logit_mean", report.positive_logit_mean},
      {"negative_logit_mean", report.negative_logit_mean},
      {"grad_spike_count", report.grad_spike_count},
  };
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows, const std::vector<std::size_t>& ks) {
  std::string out = "axis,value,loss,seed";
  for (std::size_t k : ks) out += ",recall_i2t_at_" + std::to_string(k);
  for (std::size_t k : ks) out += ",recall_t2i_at_" + std::to_string(k);
  out += ",zero_shot_accuracy,final_loss,final_t,final_b,positive_logit_mean,negative_logit_mean,"
         "grad_spikes\n";
  for (const SweepRow& row : rows) {
    out += row.axis + ',' + row.value + ',' + row.loss + ',' + std::to_string(row.seed);
    for (double r : row.report.recall_img2txt) out += ',' + format_double(r);
    for (double r : row.report.recall_txt2img) out += ',' + format_double(r);
    out += ',' + format_double(row.report.zero_shot_accuracy);
    out += ',' + format_double(row.report.final_loss);
    out += ',' + format_double(row.report.final_t);
    out += ',' + format_double(row.report.final_b);
    out += ',' + format_double(row.report.positive_logit_mean);
    out += ',' + format_double(row.report.negative_logit_mean);
    out += ',' + std::to_string(row.report.grad_spike_count) + '\n';
  }
  return out;
}

}  // namespace siglab
