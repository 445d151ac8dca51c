#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "siglab/chunked.hpp"
#include "siglab/config.hpp"
#include "siglab/errors.hpp"
#include "siglab/harness.hpp"
#include "siglab/matrix.hpp"
#include "siglab/model.hpp"
#include "siglab/rng.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;

namespace {

using namespace siglab;

// Exit codes: 0 ok, 1 check/assertion failure, 2 config error, 3 IO error.
int exit_code_for(const Error& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr ||
      dynamic_cast<const InvalidRatio*>(&e) != nullptr ||
      dynamic_cast<const IndivisibleBatch*>(&e) != nullptr) {
    return 2;
  }
  return 1;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

FullConfig load_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  FullConfig cfg;
  if (!config_path.empty()) cfg = parse_config_file(config_path);
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must look like key=value, got '" + ov + "'");
    }
    apply_override(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  finalize(cfg);
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

fs::path prepare_out_dir(const std::string& out_dir, const FullConfig& cfg) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "config.txt", effective_config(cfg));
  return dir;
}

int cmd_train(const FullConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir, cfg);
  const RunOutput out = run(cfg.run);
  write_file(dir / "trace.jsonl", trace_to_jsonl(out.result.trace));
  write_file(dir / "eval.json", eval_report_to_json(out.report).dump(2) + "\n");
  save_checkpoint(out.result.model, (dir / "checkpoint.json").string());
  std::printf("train done: %zu steps, final loss %g, report in %s\n", out.result.trace.size(),
              out.result.trace.empty() ? 0.0 : out.result.trace.back().loss, dir.string().c_str());
  return 0;
}

int cmd_sweep(const FullConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir, cfg);
  const std::vector<SweepRow> rows = sweep(cfg.run, cfg.sweep);
  write_file(dir / "results.csv", sweep_to_csv(rows, cfg.run.eval_ks));
  std::printf("sweep done: %zu rows in %s\n", rows.size(), (dir / "results.csv").string().c_str());
  return 0;
}

int cmd_chunk_bench(const FullConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir, cfg);
  const BenchSpec& bench = cfg.bench;
  std::string csv = "n,devices,strategy,peak_entries,floats_transferred,permutes\n";
  const LossParams params;
  for (std::size_t n : bench.n_values) {
    RngStream rng(derive_seed(bench.seed, n));
    Matrix zi(n, bench.dim);
    Matrix zt(n, bench.dim);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < bench.dim; ++c) {
        zi(r, c) = rng.next_normal();
        zt(r, c) = rng.next_normal();
      }
    }
    zi = l2_normalize_rows(zi);
    zt = l2_normalize_rows(zt);
    for (std::size_t dev : bench.d_values) {
      const ShardPlan plan = make_shard_plan(n, dev);
      const ChunkedResult ch = chunked_sigmoid_loss(plan, zi, zt, params);
      const ChunkedResult ag = allgather_sigmoid_loss(plan, zi, zt, params);
      if (std::abs(ch.value - ag.value) > 1e-10) {
        throw Error("strategies disagree at n=" + std::to_string(n) +
                    " devices=" + std::to_string(dev));
      }
      for (const auto& [strategy, stats] :
           {std::pair<const char*, const CommStats&>{"chunked", ch.stats},
            std::pair<const char*, const CommStats&>{"allgather", ag.stats}}) {
        csv += std::to_string(n) + "," + std::to_string(dev) + "," + strategy + "," +
               std::to_string(stats.peak_similarity_entries_per_device) + "," +
               std::to_string(stats.floats_transferred) + "," +
               std::to_string(stats.permutes_executed) + "\n";
      }
    }
  }
  write_file(dir / "chunk_bench.csv", csv);
  std::printf("chunk-bench done: table in %s\n", (dir / "chunk_bench.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive loss laboratory: paired sigmoid vs softmax on synthetic data"};
  app.require_subcommand(1);

  std::string config_path;
  const char* env_out = std::getenv("SIGLAB_OUT");
  std::string out_dir = env_out != nullptr ? env_out : "out";
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file, one pair per line");
    cmd->add_option("--out", out_dir, "output directory (default $SIGLAB_OUT or ./out)");
    cmd->add_option("--set", overrides, "override a config key, e.g. --set batch_size=32")
        ->take_all();
  };

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the oracle check suite");
  bool perturb_bias_grad = false;
  verify_cmd->add_flag("--perturb-bias-grad", perturb_bias_grad)->group("");

  CLI::App* train_cmd =
      app.add_subcommand("train", "one training run; writes trace.jsonl, eval.json, checkpoint");
  add_common(train_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run an ablation axis; writes results.csv");
  add_common(sweep_cmd);
  CLI::App* bench_cmd = app.add_subcommand(
      "chunk-bench", "tabulate communication and memory stats per sharding strategy");
  add_common(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // fold CLI11 usage errors into the config-error exit
  }

  try {
    if (verify_cmd->parsed()) {
      return siglab_cli::run_verify(perturb_bias_grad) ? 0 : 1;
    }
    const FullConfig cfg = load_config(config_path, overrides);
    if (train_cmd->parsed()) return cmd_train(cfg, out_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out_dir);
    return cmd_chunk_bench(cfg, out_dir);
  } catch (const siglab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
