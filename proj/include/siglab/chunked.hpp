#pragma once

#include <cstdint>
#include <vector>

#include "siglab/loss.hpp"
#include "siglab/matrix.hpp"

#include "json.hpp"

namespace siglab {

// Partition of a global batch across simulated devices.
struct ShardPlan {
  std::size_t n_global = 0;   // |B|
  std::size_t n_devices = 1;  // D
  std::size_t per_device = 0; // b = |B| / D
};

// Throws IndivisibleBatch unless n_global is a positive multiple of n_devices.
ShardPlan make_shard_plan(std::size_t n_global, std::size_t n_devices);

struct DeviceState {
  std::size_t device_id = 0;
  Matrix local_images;          // b x d, never moves
  Matrix resident_texts;        // b x d, rotates between rounds
  std::size_t resident_shard = 0;
  double partial_loss = 0.0;
  LossGrads partial_grads;      // accumulators for the local image rows
};

// Communication and memory accounting for one evaluation.
// floats_transferred counts embedding floats moved on the forward pathway;
// gradient backhaul retraces the same schedule and is not billed twice.
struct CommStats {
  std::size_t permutes_executed = 0;
  std::size_t floats_transferred = 0;
  std::size_t peak_similarity_entries_per_device = 0;
};

struct ChunkedResult {
  double value = 0.0;
  LossGrads grads;
  CommStats stats;
};

// Device k receives rows [k*b, (k+1)*b) of both batches.
std::vector<DeviceState> shard(const Matrix& zimg, const Matrix& ztxt, std::size_t n_devices);

// Sigmoid loss evaluated in D rounds of b x b similarity blocks. Round 0
// scores each device's own texts (all local positives); each later round
// first permutes text shards so device k receives the shard previously
// held by device (k+1) mod D, then scores the visiting negatives. Text
// gradients accumulate in a buffer attached to the traveling shard and
// are returned to the owner through the inverse schedule. At no point is
// more than one b x b block materialized per device.
ChunkedResult chunked_sigmoid_loss(const ShardPlan& plan, const Matrix& zimg, const Matrix& ztxt,
                                   const LossParams& params);

// Baseline strategy: two all-gathers deliver every image and text shard to
// every device; device k then scores its b x |B| row block (for the loss
// and its image gradients) and the |B| x b column block of its own texts
// (for their gradients), so no gradient communication is needed.
ChunkedResult allgather_sigmoid_loss(const ShardPlan& plan, const Matrix& zimg, const Matrix& ztxt,
                                     const LossParams& params);

// Per-run stats record consumed by the CLI.
nlohmann::json stats_record(const ShardPlan& plan, const std::string& strategy,
                            const CommStats& stats);

}  // namespace siglab
