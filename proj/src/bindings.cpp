#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relex/commands.hpp"
#include "relex/config.hpp"
#include "relex/corpus.hpp"
#include "relex/deptree.hpp"
#include "relex/evaluator.hpp"
#include "relex/synth.hpp"
#include "relex/tape.hpp"

namespace py = pybind11;
using namespace relex;

namespace {

RunConfig config_from_dict(const py::dict& overrides) {
  RunConfig cfg;
  for (const auto& item : overrides)
    cfg.set(py::cast<std::string>(item.first), py::cast<std::string>(item.second));
  return cfg;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["tp"] = m.tp;
  d["fp"] = m.fp;
  d["fn"] = m.fn;
  return d;
}

std::vector<PredictionRecord> records_from_tuples(
    const std::vector<std::tuple<int, double, int>>& rows) {
  std::vector<PredictionRecord> records;
  records.reserve(rows.size());
  for (const auto& [argmax, conf, gold] : rows)
    records.push_back(PredictionRecord{argmax, conf, gold, 0, 0});
  return records;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "relation extraction toolkit core";

  m.def("generate_corpus", &generate_corpus_lines, py::arg("seed"), py::arg("count"),
        "deterministic synthetic corpus as JSONL lines");

  m.def(
      "token_distances",
      [](const std::vector<int>& heads, int src) {
        return token_distances(build_tree(heads), src);
      },
      py::arg("heads"), py::arg("src"), "undirected tree distances from one token");

  m.def("dep_weight", &dep_weight, py::arg("l"), py::arg("ws"), py::arg("literal_zero") = false);

  m.def("positional_bucket", &positional_bucket, py::arg("i"), py::arg("entity_start"),
        py::arg("max_pos"));

  m.def("predict_label", &predict_label, py::arg("probs"), py::arg("threshold"),
        "argmax with confidence demotion to None");

  m.def(
      "prf1",
      [](const std::vector<std::tuple<int, double, int>>& rows, double threshold) {
        return metrics_dict(prf1(records_from_tuples(rows), threshold));
      },
      py::arg("records"), py::arg("threshold") = 0.0,
      "micro-averaged metrics over (argmax, confidence, gold) rows");

  m.def(
      "tune_threshold",
      [](const std::vector<std::tuple<int, double, int>>& rows) {
        return tune_threshold(records_from_tuples(rows));
      },
      py::arg("records"));

  m.def(
      "attention_probs",
      [](const std::vector<double>& scores, const std::vector<int>& dist,
         const std::vector<bool>& keep, int ws, const std::string& variant) {
        HyperParams hyper;
        hyper.ws = ws;
        hyper.attention_variant = attention_variant_from_string(variant);
        std::vector<char> kept(keep.begin(), keep.end());
        ad::Tape tape;
        ad::Tensor s =
            ad::Tensor::from_values({static_cast<int>(scores.size())}, scores);
        return attention_probs(tape, s, dist, kept, hyper).data();
      },
      py::arg("scores"), py::arg("dist"), py::arg("keep"), py::arg("ws") = 5,
      py::arg("variant") = "dep_weighted");

  m.def(
      "gradcheck",
      [](std::uint64_t seed, double eps, int samples) {
        HyperParams base;  // desk-sized dimensions keep smoke tests quick
        base.d_w = 8;
        base.d_z = 4;
        base.d_u = 3;
        base.f_g = 10;
        base.f_e = 10;
        base.m = 2;
        double worst = 0.0;
        for (const auto& check : run_model_gradcheck(base, seed, eps, samples))
          worst = std::max(worst, check.report.max_rel_err);
        return worst;
      },
      py::arg("seed") = 7, py::arg("eps") = 1e-5, py::arg("samples") = 3,
      "worst relative error of the full-loss gradient across all variants");

  m.def(
      "train", [](const py::dict& cfg) { return cmd_train(config_from_dict(cfg)); },
      py::arg("config"), "run training from a config dict; returns the exit code");
  m.def(
      "evaluate", [](const py::dict& cfg) { return cmd_eval(config_from_dict(cfg)); },
      py::arg("config"));
  m.def(
      "predict_file", [](const py::dict& cfg) { return cmd_predict(config_from_dict(cfg)); },
      py::arg("config"));
  m.def(
      "synth", [](const py::dict& cfg) { return cmd_synth(config_from_dict(cfg)); },
      py::arg("config"));

  m.attr("__version__") = "0.1.0";
}
