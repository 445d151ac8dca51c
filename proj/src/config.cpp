#include "siglab/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "siglab/errors.hpp"

namespace siglab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream stream(s);
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigError("key '" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const std::string& token : split_commas(value)) {
    out.push_back(static_cast<std::size_t>(parse_u64(key, token)));
  }
  if (out.empty()) {
    throw ConfigError("key '" + key + "' expects a comma-separated list");
  }
  return out;
}

std::string format_double_cfg(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += values[i];
  }
  return out;
}

struct KeyEntry {
  const char* key;
  std::function<void(FullConfig&, const std::string&)> set;
  std::function<std::string(const FullConfig&)> get;
};

const std::vector<KeyEntry>& key_table() {
  auto u64 = [](const std::string& k, const std::string& v) { return parse_u64(k, v); };
  auto sz = [u64](const std::string& k, const std::string& v) {
    return static_cast<std::size_t>(u64(k, v));
  };
  static const std::vector<KeyEntry> table = {
      {"loss",
       [](FullConfig& c, const std::string& v) { c.run.loss = loss_kind_from_string(v); },
       [](const FullConfig& c) { return to_string(c.run.loss); }},
      {"batch_size",
       [sz](FullConfig& c, const std::string& v) { c.run.batch_size = sz("batch_size", v); },
       [](const FullConfig& c) { return std::to_string(c.run.batch_size); }},
      {"total_examples_seen",
       [sz](FullConfig& c, const std::string& v) {
         c.run.total_examples_seen = sz("total_examples_seen", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.total_examples_seen); }},
      {"devices",
       [sz](FullConfig& c, const std::string& v) { c.run.devices = sz("devices", v); },
       [](const FullConfig& c) { return std::to_string(c.run.devices); }},
      {"seed",
       [u64](FullConfig& c, const std::string& v) { c.run.seed = u64("seed", v); },
       [](const FullConfig& c) { return std::to_string(c.run.seed); }},
      {"tower_mode",
       [](FullConfig& c, const std::string& v) { c.run.tower_mode = tower_mode_from_string(v); },
       [](const FullConfig& c) { return to_string(c.run.tower_mode); }},
      {"t_prime_init",
       [](FullConfig& c, const std::string& v) { c.run.t_prime_init = parse_double("t_prime_init", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.t_prime_init); }},
      {"bias_init",
       [](FullConfig& c, const std::string& v) { c.run.bias_init = parse_double("bias_init", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.bias_init); }},
      {"f32_params",
       [](FullConfig& c, const std::string& v) { c.run.f32_params = parse_bool("f32_params", v); },
       [](const FullConfig& c) { return c.run.f32_params ? "true" : "false"; }},
      {"matched_pairs",
       [](FullConfig& c, const std::string& v) { c.run.matched_pairs = parse_bool("matched_pairs", v); },
       [](const FullConfig& c) { return c.run.matched_pairs ? "true" : "false"; }},
      {"mask.strategy",
       [](FullConfig& c, const std::string& v) { c.run.mask.strategy = mask_strategy_from_string(v); },
       [](const FullConfig& c) { return to_string(c.run.mask.strategy); }},
      {"mask.negatives_per_positive",
       [](FullConfig& c, const std::string& v) {
         c.run.mask.negatives_per_positive = parse_double("mask.negatives_per_positive", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.mask.negatives_per_positive); }},
      {"corrupt.image_p",
       [](FullConfig& c, const std::string& v) {
         c.run.corruption.image_noise_p = parse_double("corrupt.image_p", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.corruption.image_noise_p); }},
      {"corrupt.text_p",
       [](FullConfig& c, const std::string& v) {
         c.run.corruption.text_scramble_p = parse_double("corrupt.text_p", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.corruption.text_scramble_p); }},
      {"corrupt.align_p",
       [](FullConfig& c, const std::string& v) {
         c.run.corruption.misalign_p = parse_double("corrupt.align_p", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.corruption.misalign_p); }},
      {"model.embed_dim",
       [sz](FullConfig& c, const std::string& v) { c.run.dims.embed_dim = sz("model.embed_dim", v); },
       [](const FullConfig& c) { return std::to_string(c.run.dims.embed_dim); }},
      {"model.image_hidden",
       [sz](FullConfig& c, const std::string& v) {
         c.run.dims.image_hidden = sz("model.image_hidden", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.dims.image_hidden); }},
      {"model.text_hidden",
       [sz](FullConfig& c, const std::string& v) {
         c.run.dims.text_hidden = sz("model.text_hidden", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.dims.text_hidden); }},
      {"model.bottleneck_k",
       [sz](FullConfig& c, const std::string& v) {
         c.run.dims.bottleneck_k = sz("model.bottleneck_k", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.dims.bottleneck_k); }},
      {"model.text_width",
       [sz](FullConfig& c, const std::string& v) {
         c.run.dims.text_width = sz("model.text_width", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.dims.text_width); }},
      {"data.latent_dim",
       [sz](FullConfig& c, const std::string& v) {
         c.run.data.latent_dim = sz("data.latent_dim", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.data.latent_dim); }},
      {"data.image_dim",
       [sz](FullConfig& c, const std::string& v) {
         c.run.data.image_dim = sz("data.image_dim", v);
         c.run.dims.image_dim = c.run.data.image_dim;
       },
       [](const FullConfig& c) { return std::to_string(c.run.data.image_dim); }},
      {"data.vocab",
       [sz](FullConfig& c, const std::string& v) {
         c.run.data.vocab_size = sz("data.vocab", v);
         c.run.dims.vocab_size = c.run.data.vocab_size;
       },
       [](const FullConfig& c) { return std::to_string(c.run.data.vocab_size); }},
      {"data.text_len",
       [sz](FullConfig& c, const std::string& v) { c.run.data.text_len = sz("data.text_len", v); },
       [](const FullConfig& c) { return std::to_string(c.run.data.text_len); }},
      {"data.classes",
       [sz](FullConfig& c, const std::string& v) { c.run.data.n_classes = sz("data.classes", v); },
       [](const FullConfig& c) { return std::to_string(c.run.data.n_classes); }},
      {"data.noise_sigma",
       [](FullConfig& c, const std::string& v) {
         c.run.data.noise_sigma = parse_double("data.noise_sigma", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.data.noise_sigma); }},
      {"data.seed",
       [u64](FullConfig& c, const std::string& v) { c.run.data.seed = u64("data.seed", v); },
       [](const FullConfig& c) { return std::to_string(c.run.data.seed); }},
      {"data.train_size",
       [sz](FullConfig& c, const std::string& v) { c.run.train_size = sz("data.train_size", v); },
       [](const FullConfig& c) { return std::to_string(c.run.train_size); }},
      {"data.eval_size",
       [sz](FullConfig& c, const std::string& v) { c.run.eval_size = sz("data.eval_size", v); },
       [](const FullConfig& c) { return std::to_string(c.run.eval_size); }},
      {"optim.beta1",
       [](FullConfig& c, const std::string& v) { c.run.optim.beta1 = parse_double("optim.beta1", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.beta1); }},
      {"optim.beta2",
       [](FullConfig& c, const std::string& v) { c.run.optim.beta2 = parse_double("optim.beta2", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.beta2); }},
      {"optim.eps",
       [](FullConfig& c, const std::string& v) { c.run.optim.eps = parse_double("optim.eps", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.eps); }},
      {"optim.lr",
       [](FullConfig& c, const std::string& v) { c.run.optim.base_lr = parse_double("optim.lr", v); },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.base_lr); }},
      {"optim.weight_decay",
       [](FullConfig& c, const std::string& v) {
         c.run.optim.weight_decay = parse_double("optim.weight_decay", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.weight_decay); }},
      {"optim.grad_clip",
       [](FullConfig& c, const std::string& v) {
         c.run.optim.grad_clip_norm = parse_double("optim.grad_clip", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.optim.grad_clip_norm); }},
      {"schedule.kind",
       [](FullConfig& c, const std::string& v) {
         c.run.schedule_kind = schedule_kind_from_string(v);
       },
       [](const FullConfig& c) { return to_string(c.run.schedule_kind); }},
      {"schedule.warmup_frac",
       [](FullConfig& c, const std::string& v) {
         c.run.warmup_frac = parse_double("schedule.warmup_frac", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.warmup_frac); }},
      {"monitor.window",
       [sz](FullConfig& c, const std::string& v) {
         c.run.monitor_window = sz("monitor.window", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.monitor_window); }},
      {"monitor.spike_factor",
       [](FullConfig& c, const std::string& v) {
         c.run.spike_factor = parse_double("monitor.spike_factor", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.spike_factor); }},
      {"eval.ks",
       [](FullConfig& c, const std::string& v) { c.run.eval_ks = parse_size_list("eval.ks", v); },
       [](const FullConfig& c) { return join_sizes(c.run.eval_ks); }},
      {"pretrain.steps",
       [sz](FullConfig& c, const std::string& v) {
         c.run.pretrain_steps = sz("pretrain.steps", v);
       },
       [](const FullConfig& c) { return std::to_string(c.run.pretrain_steps); }},
      {"pretrain.lr",
       [](FullConfig& c, const std::string& v) {
         c.run.pretrain_lr = parse_double("pretrain.lr", v);
       },
       [](const FullConfig& c) { return format_double_cfg(c.run.pretrain_lr); }},
      {"sweep.axis",
       [](FullConfig& c, const std::string& v) { c.sweep.axis = sweep_axis_from_string(v); },
       [](const FullConfig& c) { return to_string(c.sweep.axis); }},
      {"sweep.values",
       [](FullConfig& c, const std::string& v) {
         c.sweep_value_tokens = split_commas(v);
         if (c.sweep_value_tokens.empty()) {
           throw ConfigError("key 'sweep.values' expects a comma-separated list");
         }
       },
       [](const FullConfig& c) { return join_strings(c.sweep_value_tokens); }},
      {"sweep.seeds",
       [sz](FullConfig& c, const std::string& v) { c.sweep.n_seeds = sz("sweep.seeds", v); },
       [](const FullConfig& c) { return std::to_string(c.sweep.n_seeds); }},
      {"sweep.losses",
       [](FullConfig& c, const std::string& v) {
         c.sweep.losses.clear();
         for (const std::string& token : split_commas(v)) {
           c.sweep.losses.push_back(loss_kind_from_string(token));
         }
         if (c.sweep.losses.empty()) {
           throw ConfigError("key 'sweep.losses' expects a comma-separated list");
         }
       },
       [](const FullConfig& c) {
         std::vector<std::string> names;
         for (LossKind kind : c.sweep.losses) names.push_back(to_string(kind));
         return join_strings(names);
       }},
      {"sweep.corruption_channel",
       [](FullConfig& c, const std::string& v) {
         c.sweep.channel = corruption_channel_from_string(v);
       },
       [](const FullConfig& c) { return to_string(c.sweep.channel); }},
      {"bench.n_values",
       [](FullConfig& c, const std::string& v) {
         c.bench.n_values = parse_size_list("bench.n_values", v);
       },
       [](const FullConfig& c) { return join_sizes(c.bench.n_values); }},
      {"bench.d_values",
       [](FullConfig& c, const std::string& v) {
         c.bench.d_values = parse_size_list("bench.d_values", v);
       },
       [](const FullConfig& c) { return join_sizes(c.bench.d_values); }},
      {"bench.dim",
       [sz](FullConfig& c, const std::string& v) { c.bench.dim = sz("bench.dim", v); },
       [](const FullConfig& c) { return std::to_string(c.bench.dim); }},
      {"bench.seed",
       [u64](FullConfig& c, const std::string& v) { c.bench.seed = u64("bench.seed", v); },
       [](const FullConfig& c) { return std::to_string(c.bench.seed); }},
  };
  return table;
}

}  // namespace

void apply_override(FullConfig& cfg, const std::string& key, const std::string& value) {
  for (const KeyEntry& entry : key_table()) {
    if (key == entry.key) {
      entry.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

FullConfig parse_config_text(const std::string& text) {
  FullConfig cfg;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + " is not 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + " has an empty key");
    }
    apply_override(cfg, key, value);
  }
  return cfg;
}

FullConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void finalize(FullConfig& cfg) {
  cfg.sweep.values.clear();
  cfg.sweep.mask_values.clear();
  for (const std::string& token : cfg.sweep_value_tokens) {
    if (cfg.sweep.axis == SweepAxis::mask) {
      cfg.sweep.mask_values.push_back(mask_strategy_from_string(token));
    } else {
      cfg.sweep.values.push_back(parse_double("sweep.values", token));
    }
  }
}

std::string effective_config(const FullConfig& cfg) {
  std::string out;
  for (const KeyEntry& entry : key_table()) {
    out += entry.key;
    out += " = ";
    out += entry.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace siglab
