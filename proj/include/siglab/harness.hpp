#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglab/data.hpp"
#include "siglab/loss.hpp"
#include "siglab/model.hpp"
#include "siglab/optim.hpp"

#include "json.hpp"

namespace siglab {

enum class LossKind { sigmoid, softmax };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind kind);

struct RunConfig {
  LossKind loss = LossKind::sigmoid;
  std::size_t batch_size = 16;
  std::size_t total_examples_seen = 4096;
  std::size_t devices = 1;
  std::uint64_t seed = 1;
  TowerMode tower_mode = TowerMode::both_trainable;
  double t_prime_init = kDefaultTPrime;
  double bias_init = kDefaultBias;
  bool f32_params = false;

  MaskSpec mask;               // strategy none = full batch
  bool matched_pairs = false;  // extend steps by the masking ratio

  CorruptionSpec corruption;  // applied to every training batch
  ModelDims dims;
  SyntheticPairSpec data;  // data.seed is independent of the run seed
  std::size_t train_size = 2048;
  std::size_t eval_size = 128;

  OptimConfig optim;
  ScheduleKind schedule_kind = ScheduleKind::warmup_cosine;
  double warmup_frac = 0.1;

  std::size_t monitor_window = 50;
  double spike_factor = 5.0;
  std::vector<std::size_t> eval_ks = {1, 5};

  std::size_t pretrain_steps = 200;
  double pretrain_lr = 0.01;
};

// Enforces: examples divisible by batch, batch divisible by devices and
// bounded by train_size, masking and softmax confined to one device,
// matched_pairs only with masking, and submodule validity.
void validate(const RunConfig& cfg);

// Steps actually executed: total_examples_seen / batch_size, scaled by
// the masking ratio n(n-1)/k in matched-pairs mode.
std::size_t planned_steps(const RunConfig& cfg);

struct StepMetrics {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  bool spike = false;
  double t = 0.0;  // temperature after the update
  double b = 0.0;  // bias after the update
};

struct TrainResult {
  TwoTowerModel model;
  std::vector<StepMetrics> trace;
};

TrainResult train(const RunConfig& cfg);

// Resume-style entry: same loop but starting from a caller-supplied
// model. Used by the pretrained-tower modes and tests.
TrainResult train_from(const RunConfig& cfg, TwoTowerModel model);

struct EncodedBatch {
  Matrix zimg;  // normalized
  Matrix ztxt;  // normalized
};

EncodedBatch encode(const TwoTowerModel& model, const Matrix& images, const TokenBatch& tokens);

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<double> recall_img2txt;  // aligned with ks
  std::vector<double> recall_txt2img;
  double zero_shot_accuracy = 0.0;
  double final_loss = 0.0;
  double final_t = 0.0;
  double final_b = 0.0;
  double positive_logit_mean = 0.0;
  double negative_logit_mean = 0.0;
  std::size_t grad_spike_count = 0;
};

// Retrieval recall@k in both directions (cosine ranking, ties broken by
// ascending index), prototype zero-shot accuracy (mean class text
// embedding, re-normalized), and the eval-set loss under the model's
// current scalars. grad_spike_count is left 0; run() fills it from the
// trace.
EvalReport evaluate(const TwoTowerModel& model, const PairDataset& eval_set,
                    const std::vector<std::size_t>& ks, LossKind loss_kind);

struct RunOutput {
  TrainResult result;
  EvalReport report;
};

// train + evaluate on a freshly generated eval stream (disjoint from the
// train stream by construction).
RunOutput run(const RunConfig& cfg);

// Proxy pretraining for the image tower: a temporary linear head
// regresses the generating latents with MSE; the head is discarded.
void pretrain_image_tower(TwoTowerModel& model, const RunConfig& cfg);

enum class SweepAxis { batch_size, mask, corruption, beta2, bias_init };
enum class CorruptionChannel { image, text, align, image_text, image_text_align };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);
CorruptionChannel corruption_channel_from_string(const std::string& s);
std::string to_string(CorruptionChannel channel);

struct SweepSpec {
  SweepAxis axis = SweepAxis::batch_size;
  std::vector<double> values;                // numeric axes
  std::vector<MaskStrategy> mask_values;     // mask axis
  std::vector<LossKind> losses = {LossKind::sigmoid};
  std::size_t n_seeds = 1;
  CorruptionChannel channel = CorruptionChannel::image;
};

struct SweepRow {
  std::string axis;
  std::string value;
  std::string loss;
  std::uint64_t seed = 0;
  EvalReport report;
};

// One run per (value, loss, seed replicate). Replicate s uses run seed
// base.seed + s over a shared dataset, so the axis is the only moving
// part within a replicate.
std::vector<SweepRow> sweep(const RunConfig& base, const SweepSpec& spec);

// Serialization helpers shared by the CLI and tests. All doubles use
// shortest round-trip formatting so outputs are byte-stable.
std::string trace_to_jsonl(const std::vector<StepMetrics>& trace);
nlohmann::json eval_report_to_json(const EvalReport& report);
std::string sweep_to_csv(const std::vector<SweepRow>& rows, const std::vector<std::size_t>& ks);

}  // namespace siglab
