#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglab/harness.hpp"

namespace siglab {

// Grid for the chunking benchmark: every (batch, devices) combination
// with devices dividing the batch.
struct BenchSpec {
  std::vector<std::size_t> n_values = {64, 128, 256};
  std::vector<std::size_t> d_values = {1, 2, 4, 8};
  std::size_t dim = 16;
  std::uint64_t seed = 7;
};

struct FullConfig {
  RunConfig run;
  SweepSpec sweep;
  BenchSpec bench;
  // sweep.values straddles numeric axes and mask-strategy names, so the
  // tokens stay raw until finalize() knows the axis.
  std::vector<std::string> sweep_value_tokens = {"16", "32", "64"};
};

// Plain-text config: one `key = value` per line, '#' starts a comment,
// later lines override earlier ones. Unknown keys are hard errors
// (ConfigError), as are malformed values.
FullConfig parse_config_text(const std::string& text);
FullConfig parse_config_file(const std::string& path);

void apply_override(FullConfig& cfg, const std::string& key, const std::string& value);

// Materializes sweep values for the configured axis. Call after all
// overrides are in.
void finalize(FullConfig& cfg);

// Echo of every known key with its current value; parsing the echo
// reproduces the config exactly.
std::string effective_config(const FullConfig& cfg);

}  // namespace siglab
