// Python surface for the loss laboratory. Matrices cross the boundary as
// lists of rows; run configuration reuses the text-config keys so the two
// front ends cannot drift apart.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "siglab/chunked.hpp"
#include "siglab/config.hpp"
#include "siglab/errors.hpp"
#include "siglab/harness.hpp"
#include "siglab/loss.hpp"
#include "siglab/matrix.hpp"

namespace py = pybind11;
using namespace siglab;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows[0].size();
  Matrix m(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != d) {
      throw ShapeMismatch("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                          " entries, expected " + std::to_string(d));
    }
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Rows from_matrix(const Matrix& m) {
  Rows rows(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  }
  return rows;
}

py::dict grads_to_dict(const LossGrads& g) {
  py::dict out;
  out["d_zimg"] = from_matrix(g.d_zimg);
  out["d_ztxt"] = from_matrix(g.d_ztxt);
  out["d_t_prime"] = g.d_t_prime;
  out["d_bias"] = g.d_bias;
  return out;
}

py::dict report_to_dict(const EvalReport& rep) {
  py::dict recall_i2t, recall_t2i;
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    recall_i2t[py::int_(rep.ks[i])] = rep.recall_img2txt[i];
    recall_t2i[py::int_(rep.ks[i])] = rep.recall_txt2img[i];
  }
  py::dict out;
  out["recall_img2txt"] = recall_i2t;
  out["recall_txt2img"] = recall_t2i;
  out["zero_shot_accuracy"] = rep.zero_shot_accuracy;
  out["final_loss"] = rep.final_loss;
  out["final_t"] = rep.final_t;
  out["final_b"] = rep.final_b;
  out["positive_logit_mean"] = rep.positive_logit_mean;
  out["negative_logit_mean"] = rep.negative_logit_mean;
  out["grad_spike_count"] = rep.grad_spike_count;
  return out;
}

FullConfig config_from_dict(const py::dict& options) {
  FullConfig cfg;
  for (const auto& item : options) {
    const std::string key = py::str(item.first);
    std::string value;
    if (py::isinstance<py::bool_>(item.second)) {
      value = item.second.cast<bool>() ? "true" : "false";
    } else {
      value = py::str(item.second);
    }
    apply_override(cfg, key, value);
  }
  finalize(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "pairwise sigmoid vs softmax contrastive losses on synthetic paired data";

  py::register_exception<Error>(m, "SiglabError");

  m.attr("DEFAULT_T_PRIME") = kDefaultTPrime;
  m.attr("DEFAULT_BIAS") = kDefaultBias;

  m.def("log_sigmoid", &log_sigmoid, py::arg("x"),
        "Numerically safe log(sigmoid(x)) for any finite x.");

  m.def(
      "l2_normalize_rows",
      [](const Rows& rows) { return from_matrix(l2_normalize_rows(to_matrix(rows))); },
      py::arg("rows"), "Scale every row to unit Euclidean norm.");

  m.def(
      "sigmoid_loss",
      [](const Rows& zimg, const Rows& ztxt, double t_prime, double bias) {
        const LossOutput out = sigmoid_loss(to_matrix(zimg), to_matrix(ztxt),
                                            LossParams{t_prime, bias});
        py::dict d;
        d["value"] = out.value;
        d["positive_logit_mean"] = out.positive_logit_mean;
        d["negative_logit_mean"] = out.negative_logit_mean;
        return d;
      },
      py::arg("zimg"), py::arg("ztxt"), py::arg("t_prime") = kDefaultTPrime,
      py::arg("bias") = kDefaultBias,
      "Pairwise sigmoid loss over normalized embedding batches.");

  m.def(
      "sigmoid_loss_grads",
      [](const Rows& zimg, const Rows& ztxt, double t_prime, double bias) {
        return grads_to_dict(
            sigmoid_loss_grads(to_matrix(zimg), to_matrix(ztxt), LossParams{t_prime, bias}));
      },
      py::arg("zimg"), py::arg("ztxt"), py::arg("t_prime") = kDefaultTPrime,
      py::arg("bias") = kDefaultBias);

  m.def(
      "softmax_loss",
      [](const Rows& zimg, const Rows& ztxt, double t_prime) {
        return softmax_loss(to_matrix(zimg), to_matrix(ztxt), t_prime).value;
      },
      py::arg("zimg"), py::arg("ztxt"), py::arg("t_prime") = kDefaultTPrime,
      "Symmetric softmax contrastive loss (no bias term).");

  m.def(
      "softmax_loss_grads",
      [](const Rows& zimg, const Rows& ztxt, double t_prime) {
        return grads_to_dict(softmax_loss_grads(to_matrix(zimg), to_matrix(ztxt), t_prime));
      },
      py::arg("zimg"), py::arg("ztxt"), py::arg("t_prime") = kDefaultTPrime);

  m.def(
      "chunked_sigmoid_loss",
      [](const Rows& zimg, const Rows& ztxt, std::size_t devices, double t_prime, double bias) {
        const Matrix zi = to_matrix(zimg);
        const Matrix zt = to_matrix(ztxt);
        const ChunkedResult res = chunked_sigmoid_loss(make_shard_plan(zi.rows(), devices), zi, zt,
                                                       LossParams{t_prime, bias});
        py::dict d;
        d["value"] = res.value;
        d["grads"] = grads_to_dict(res.grads);
        d["permutes"] = res.stats.permutes_executed;
        d["floats_transferred"] = res.stats.floats_transferred;
        d["peak_entries_per_device"] = res.stats.peak_similarity_entries_per_device;
        return d;
      },
      py::arg("zimg"), py::arg("ztxt"), py::arg("devices"), py::arg("t_prime") = kDefaultTPrime,
      py::arg("bias") = kDefaultBias,
      "Sigmoid loss via the rotating-shard schedule, with communication stats.");

  m.def(
      "train_and_eval",
      [](const py::dict& options) {
        const FullConfig cfg = config_from_dict(options);
        const RunOutput out = run(cfg.run);
        py::dict d = report_to_dict(out.report);
        d["steps"] = out.result.trace.size();
        d["final_train_loss"] =
            out.result.trace.empty() ? 0.0 : out.result.trace.back().loss;
        return d;
      },
      py::arg("options"),
      "Run one training job described by text-config keys, then evaluate. "
      "Example: train_and_eval({'batch_size': 8, 'optim.lr': 0.003}).");

  m.def(
      "effective_config",
      [](const py::dict& options) { return effective_config(config_from_dict(options)); },
      py::arg("options"),
      "Echo the full key = value config implied by the given overrides.");
}
