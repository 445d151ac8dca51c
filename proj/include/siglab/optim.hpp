#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "siglab/matrix.hpp"
#include "siglab/model.hpp"

namespace siglab {

struct OptimConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double base_lr = 0.001;
  double weight_decay = 0.0001;
  double grad_clip_norm = 0.0;  // <= 0 disables clipping
};

// Throws ConfigError when the betas leave (0,1) or eps/base_lr are
// non-positive.
void validate(const OptimConfig& cfg);

// Gradients mirror the group structure: grads[g][p] matches
// groups[g].params[p] in shape.
using GroupGrads = std::vector<std::vector<Matrix>>;

struct AdamState {
  std::size_t step = 0;  // completed steps
  std::vector<std::vector<Matrix>> m;
  std::vector<std::vector<Matrix>> v;
};

AdamState make_adam_state(const std::vector<ParamGroup>& groups);

// One Adam update with decoupled weight decay and bias correction.
// Frozen groups are skipped entirely, moments included. lr_t already
// reflects the schedule; per-group multipliers apply on top of it.
void adam_step(AdamState& state, std::vector<ParamGroup>& groups, const GroupGrads& grads,
               double lr_t, const OptimConfig& cfg);

enum class ScheduleKind { warmup_cosine, warmup_linear, constant };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind kind);

struct Schedule {
  ScheduleKind kind = ScheduleKind::warmup_cosine;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 0;
  double peak_lr = 0.001;
};

// warmup < total required for decaying kinds. Throws ConfigError.
void validate(const Schedule& s);

// Linear ramp to peak_lr over warmup_steps, then cosine or linear decay
// to zero at total_steps (constant kind stays at peak). Throws
// StepOutOfRange outside [0, total_steps].
double lr_at(const Schedule& s, std::size_t step);

double global_grad_norm(const GroupGrads& grads);

// Scales all gradients in place so the global norm is at most max_norm.
// Returns the pre-clip norm. No-op when max_norm <= 0.
double clip_global_norm(GroupGrads& grads, double max_norm);

// Flags a step when its norm exceeds spike_factor times the rolling
// median of the preceding window. Every norm enters the window, spikes
// included, so a persistent level shift stops flagging once the median
// catches up.
class GradMonitor {
 public:
  explicit GradMonitor(std::size_t window = 50, double spike_factor = 5.0);

  // Returns true when this norm is a spike relative to prior history.
  bool update(double norm);

  std::size_t spike_count() const { return spike_count_; }
  double rolling_median() const;  // 0 while empty

 private:
  std::size_t window_size_;
  double spike_factor_;
  std::deque<double> recent_;
  std::size_t spike_count_ = 0;
};

}  // namespace siglab
