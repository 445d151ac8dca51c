#include "siglab/optim.hpp"

#include <algorithm>
#include <cmath>

#include "siglab/errors.hpp"

namespace siglab {

void validate(const OptimConfig& cfg) {
  if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0)) {
    throw ConfigError("beta1 must lie in (0, 1)");
  }
  if (!(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("beta2 must lie in (0, 1)");
  }
  if (!(cfg.eps > 0.0)) {
    throw ConfigError("eps must be positive");
  }
  if (!(cfg.base_lr > 0.0)) {
    throw ConfigError("base_lr must be positive");
  }
  if (cfg.weight_decay < 0.0) {
    throw ConfigError("weight_decay must be nonnegative");
  }
}

AdamState make_adam_state(const std::vector<ParamGroup>& groups) {
  AdamState state;
  state.m.resize(groups.size());
  state.v.resize(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const Matrix* p : groups[g].params) {
      state.m[g].emplace_back(p->rows(), p->cols());
      state.v[g].emplace_back(p->rows(), p->cols());
    }
  }
  return state;
}

void adam_step(AdamState& state, std::vector<ParamGroup>& groups, const GroupGrads& grads,
               double lr_t, const OptimConfig& cfg) {
  if (grads.size() != groups.size() || state.m.size() != groups.size()) {
    throw ShapeMismatch("gradient group count does not match parameter groups");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    ParamGroup& group = groups[g];
    if (grads[g].size() != group.params.size()) {
      throw ShapeMismatch("gradient count does not match group '" + group.name + "'");
    }
    if (group.frozen) continue;
    const double lr = lr_t * group.lr_multiplier;
    const double wd = cfg.weight_decay * group.weight_decay_multiplier;
    for (std::size_t p = 0; p < group.params.size(); ++p) {
      Matrix& theta = *group.params[p];
      const Matrix& grad = grads[g][p];
      Matrix& m = state.m[g][p];
      Matrix& v = state.v[g][p];
      if (!grad.same_shape(theta) || !m.same_shape(theta)) {
        throw ShapeMismatch("gradient shape mismatch in group '" + group.name + "'");
      }
      for (std::size_t r = 0; r < theta.rows(); ++r) {
        for (std::size_t c = 0; c < theta.cols(); ++c) {
          const double gval = grad(r, c);
          m(r, c) = cfg.beta1 * m(r, c) + (1.0 - cfg.beta1) * gval;
          v(r, c) = cfg.beta2 * v(r, c) + (1.0 - cfg.beta2) * gval * gval;
          const double m_hat = m(r, c) / bc1;
          const double v_hat = v(r, c) / bc2;
          theta(r, c) -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + wd * theta(r, c));
        }
      }
    }
  }
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "warmup_cosine") return ScheduleKind::warmup_cosine;
  if (s == "warmup_linear") return ScheduleKind::warmup_linear;
  if (s == "constant") return ScheduleKind::constant;
  throw ConfigError("unknown schedule kind '" + s + "'");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::warmup_cosine: return "warmup_cosine";
    case ScheduleKind::warmup_linear: return "warmup_linear";
    case ScheduleKind::constant: return "constant";
  }
  return "warmup_cosine";
}

void validate(const Schedule& s) {
  if (s.total_steps == 0) {
    throw ConfigError("schedule needs at least one step");
  }
  if (s.warmup_steps > s.total_steps) {
    throw ConfigError("warmup_steps exceeds total_steps");
  }
  if (s.kind != ScheduleKind::constant && s.warmup_steps == s.total_steps) {
    throw ConfigError("decaying schedule needs steps after warmup");
  }
  if (!(s.peak_lr > 0.0)) {
    throw ConfigError("peak_lr must be positive");
  }
}

double lr_at(const Schedule& s, std::size_t step) {
  if (step > s.total_steps) {
    throw StepOutOfRange("step " + std::to_string(step) + " beyond schedule of " +
                         std::to_string(s.total_steps));
  }
  if (step < s.warmup_steps) {
    return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  if (s.kind == ScheduleKind::constant) {
    return s.peak_lr;
  }
  const double progress = static_cast<double>(step - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  if (s.kind == ScheduleKind::warmup_linear) {
    return s.peak_lr * (1.0 - progress);
  }
  constexpr double pi = 3.14159265358979323846;
  return s.peak_lr * 0.5 * (1.0 + std::cos(pi * progress));
}

double global_grad_norm(const GroupGrads& grads) {
  double sq = 0.0;
  for (const auto& group : grads) {
    for (const Matrix& g : group) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) {
          sq += g(r, c) * g(r, c);
        }
      }
    }
  }
  return std::sqrt(sq);
}

double clip_global_norm(GroupGrads& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (max_norm <= 0.0 || norm <= max_norm) {
    return norm;
  }
  const double scale = max_norm / norm;
  for (auto& group : grads) {
    for (Matrix& g : group) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) {
          g(r, c) *= scale;
        }
      }
    }
  }
  return norm;
}

GradMonitor::GradMonitor(std::size_t window, double spike_factor)
    : window_size_(window), spike_factor_(spike_factor) {
  if (window_size_ == 0) {
    throw ConfigError("monitor window must be positive");
  }
  if (!(spike_factor_ > 1.0)) {
    throw ConfigError("spike_factor must exceed 1");
  }
}

double GradMonitor::rolling_median() const {
  if (recent_.empty()) return 0.0;
  std::vector<double> sorted(recent_.begin(), recent_.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) {
    return sorted[mid];
  }
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

bool GradMonitor::update(double norm) {
  bool spike = false;
  if (!recent_.empty() && norm > spike_factor_ * rolling_median()) {
    spike = true;
    ++spike_count_;
  }
  recent_.push_back(norm);
  if (recent_.size() > window_size_) {
    recent_.pop_front();
  }
  return spike;
}

}  // namespace siglab
