#include "relex/commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "relex/checkpoint.hpp"
#include "relex/corpus.hpp"
#include "relex/evaluator.hpp"
#include "relex/network.hpp"
#include "relex/synth.hpp"
#include "relex/trainer.hpp"

namespace relex {

namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failure: " + path);
}

std::vector<Instance> load_required(const std::string& path, bool lenient, const char* what) {
  if (path.empty()) throw std::runtime_error(std::string(what) + " path is not configured");
  if (!fs::exists(path))
    throw std::runtime_error(std::string(what) + " file does not exist: " + path);
  LoadResult r = load_corpus(path, lenient);
  if (r.skipped > 0)
    std::cerr << "warning: skipped " << r.skipped << " bad line(s) in " << path << "\n";
  return std::move(r.instances);
}

std::vector<EncodedInstance> encode_all(const std::vector<Instance>& insts, const Vocab& vocab,
                                        const HyperParams& hyper) {
  std::vector<EncodedInstance> out;
  out.reserve(insts.size());
  for (const Instance& inst : insts) out.push_back(encode(inst, vocab, hyper));
  return out;
}

std::vector<PredictionRecord> forward_records(const std::vector<EncodedInstance>& encs,
                                              const ModelParams& params, const HyperParams& hyper,
                                              int workers) {
  std::vector<PredictionRecord> records(encs.size());
  auto run_range = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      const std::vector<double> probs = predict_probs(encs[i], params, hyper);
      PredictionRecord rec;
      rec.pred_argmax = predict_label(probs, 0.0);
      rec.confidence = probs[rec.pred_argmax];
      rec.gold = encs[i].label_id;
      rec.sentence_length = encs[i].n();
      rec.entity_distance = std::abs(encs[i].entity_span(2).start - encs[i].entity_span(1).start);
      records[i] = rec;
    }
  };
  if (workers <= 1 || encs.size() < 2) {
    run_range(0, encs.size());
    return records;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, encs.size());
  std::vector<std::thread> pool;
  const std::size_t chunk = (encs.size() + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t from = t * chunk;
    const std::size_t to = std::min(encs.size(), from + chunk);
    if (from < to) pool.emplace_back(run_range, from, to);
  }
  for (std::thread& th : pool) th.join();
  return records;
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  const auto train_insts = load_required(cfg.get("train_path"), cfg.get_bool("lenient"), "train");
  const auto dev_insts = load_required(cfg.get("dev_path"), cfg.get_bool("lenient"), "dev");
  if (train_insts.empty()) throw std::runtime_error("training set is empty");
  if (dev_insts.empty()) throw std::runtime_error("dev set is empty");

  const Vocab vocab = build_vocab(train_insts, cfg.get_int("min_count"));
  HyperParams hyper = cfg.hyper();
  hyper.num_labels = vocab.num_labels();

  EmbeddingTable table;
  const EmbeddingTable* embeddings = nullptr;
  if (!cfg.empty("embeddings_path")) {
    Rng emb_rng(cfg.get_u64("seed") ^ 0xE1B17A6D5Aull);
    table = load_word2vec_text(cfg.get("embeddings_path"), vocab, hyper.d_w, emb_rng);
    if (!table.warning.empty())
      std::cerr << "warning: " << cfg.get("embeddings_path") << ": " << table.warning << "\n";
    std::cout << "embeddings: coverage " << table.coverage << "\n";
    embeddings = &table;
  }

  const auto train_enc = encode_all(train_insts, vocab, hyper);
  const auto dev_enc = encode_all(dev_insts, vocab, hyper);

  const TrainConfig tc = cfg.train_config();
  const FitResult result = fit(train_enc, dev_enc, tc, hyper, vocab, embeddings);

  save_checkpoint(result.params, hyper, vocab, result.best_threshold, tc.checkpoint_path);

  std::string history_path = cfg.get("history_path");
  if (history_path.empty()) history_path = tc.checkpoint_path + ".history.csv";
  write_text(history_path, history_csv(result.history, cfg.echo_lines()));

  std::cout << "trained " << result.history.size() << " epoch(s); best dev F1 " << result.best_f1
            << " at epoch " << result.best_epoch << " (threshold " << result.best_threshold
            << ")\n"
            << "checkpoint: " << tc.checkpoint_path << "\nhistory: " << history_path << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg) {
  const Checkpoint ck = load_checkpoint(cfg.get("checkpoint_path"));
  const auto test_insts = load_required(cfg.get("test_path"), cfg.get_bool("lenient"), "test");

  std::size_t unknown_labels = 0;
  for (const Instance& inst : test_insts)
    if (!inst.relation.empty() && ck.vocab.label_id(inst.relation) < 0) ++unknown_labels;
  if (unknown_labels > 0)
    std::cerr << "warning: " << unknown_labels
              << " instance(s) carry labels absent from the checkpoint vocabulary; they count as "
                 "gold non-None and can never be matched\n";

  const auto encs = encode_all(test_insts, ck.vocab, ck.hyper);
  const auto records = forward_records(encs, ck.params, ck.hyper, cfg.get_int("workers"));

  const double theta = cfg.empty("threshold") ? ck.threshold : cfg.get_double("threshold");
  const Metrics m = prf1(records, theta);

  const fs::path out_dir(cfg.get("out_dir"));
  fs::create_directories(out_dir);
  write_text((out_dir / "metrics.json").string(), metrics_json(m, theta, cfg.echo_pairs()));
  const auto curve = pr_curve(records);
  if (curve.empty())
    std::cerr << "warning: no positive predictions; the PR curve is empty\n";
  write_text((out_dir / "pr_curve.csv").string(), pr_curve_csv(curve, cfg.echo_lines()));
  write_text((out_dir / "buckets_length.csv").string(),
             bucket_csv(bucket_report(records, BucketMode::SentenceLength,
                                      cfg.bucket_edges("length_bucket_edges"), theta),
                        cfg.echo_lines()));
  write_text((out_dir / "buckets_distance.csv").string(),
             bucket_csv(bucket_report(records, BucketMode::EntityDistance,
                                      cfg.bucket_edges("distance_bucket_edges"), theta),
                        cfg.echo_lines()));

  std::cout << "threshold " << theta << "  P " << m.precision << "  R " << m.recall << "  F1 "
            << m.f1 << "  (tp " << m.tp << " fp " << m.fp << " fn " << m.fn << ")\n"
            << "reports in " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg) {
  const Checkpoint ck = load_checkpoint(cfg.get("checkpoint_path"));
  const double theta = cfg.empty("threshold") ? ck.threshold : cfg.get_double("threshold");
  const bool lenient = cfg.get_bool("lenient");

  const std::string in_path = cfg.get("input_path");
  if (in_path.empty()) throw std::runtime_error("input path is not configured");
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open input file: " + in_path);

  std::ostream* out = &std::cout;
  std::ofstream out_file;
  if (!cfg.empty("output_path")) {
    out_file.open(cfg.get("output_path"), std::ios::binary | std::ios::trunc);
    if (!out_file) throw std::runtime_error("cannot write output file: " + cfg.get("output_path"));
    out = &out_file;
  }

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::ordered_json j;
    try {
      const Instance inst = parse_instance_line(line, /*require_relation=*/false);
      const EncodedInstance enc = encode(inst, ck.vocab, ck.hyper);
      const std::vector<double> probs = predict_probs(enc, ck.params, ck.hyper);
      const int argmax = predict_label(probs, 0.0);
      const int label = predict_label(probs, theta);
      j["relation"] = ck.vocab.label_name(label);
      j["confidence"] = probs[argmax];
    } catch (const std::exception& e) {
      const std::string msg = "line " + std::to_string(lineno) + ": " + e.what();
      if (!lenient) throw std::runtime_error(in_path + ": " + msg);
      std::cerr << "warning: " << msg << "\n";
      j["error"] = msg;
    }
    (*out) << j.dump() << "\n";
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg) {
  const int size = cfg.get_int("size");
  if (size < 1) throw std::runtime_error("synth size must be >= 1");
  const std::uint64_t seed = cfg.get_u64("seed");

  auto write_lines = [](const std::string& path, const std::vector<std::string>& lines) {
    std::string text;
    for (const std::string& l : lines) text += l + "\n";
    write_text(path, text);
  };

  write_lines(cfg.get("out_path"), generate_corpus_slice(seed, 0, size));
  std::cout << "wrote " << size << " instance(s) to " << cfg.get("out_path") << "\n";

  int offset = size;
  for (const auto& [size_key, out_key] :
       {std::pair{"dev_size", "dev_out"}, std::pair{"test_size", "test_out"}}) {
    const int extra = cfg.get_int(size_key);
    if (extra < 1) continue;
    if (cfg.empty(out_key))
      throw std::runtime_error(std::string(size_key) + " given without " + out_key);
    write_lines(cfg.get(out_key), generate_corpus_slice(seed, offset, extra));
    std::cout << "wrote " << extra << " instance(s) to " << cfg.get(out_key) << "\n";
    offset += extra;
  }
  return kExitOk;
}

// ------------------------------------------------------------- gradcheck

namespace {

// small random vocabulary and one random instance; fixed label inventory
Instance random_instance(Rng& rng, int n_tokens) {
  static const std::vector<std::string> words = {
      "alpha", "bravo", "charlie", "delta", "echo",  "foxtrot", "golf",   "hotel",
      "india", "juliet", "kilo",   "lima",  "mike",  "november", "oscar", "papa",
      "quebec", "romeo", "sierra", "tango", "uniform", "victor", "whiskey", "xray"};
  Instance inst;
  for (int i = 0; i < n_tokens; ++i)
    inst.tokens.push_back(words[rng.below(words.size())]);
  inst.dep_heads.assign(n_tokens, -1);
  for (int i = 1; i < n_tokens; ++i) inst.dep_heads[i] = rng.below_int(i);  // random attachment

  const int e1 = rng.below_int(n_tokens);
  int e2 = rng.below_int(n_tokens);
  while (e2 == e1) e2 = rng.below_int(n_tokens);
  inst.entity1 = Span{std::min(e1, e2), std::min(e1, e2)};
  inst.entity2 = Span{std::max(e1, e2), std::max(e1, e2)};
  inst.relation = "r" + std::to_string(rng.below(5));
  inst.validate();
  return inst;
}

}  // namespace

std::vector<VariantCheck> run_model_gradcheck(const HyperParams& base, std::uint64_t seed,
                                              double eps, int samples) {
  Rng data_rng(seed);
  const Instance inst = random_instance(data_rng, 8);

  Vocab vocab;
  for (const std::string& tok : inst.tokens) vocab.add_token(tok);
  for (int r = 0; r < 5; ++r) vocab.add_label("r" + std::to_string(r));

  std::vector<VariantCheck> checks;
  for (AttentionVariant variant : {AttentionVariant::None, AttentionVariant::Standard,
                                   AttentionVariant::DepWeighted, AttentionVariant::SoftmaxNorm}) {
    for (CombineMode combine : {CombineMode::Concat, CombineMode::MaxPool}) {
      HyperParams hyper = base;
      hyper.attention_variant = variant;
      hyper.combine_mode = combine;
      hyper.num_labels = vocab.num_labels();
      if (hyper.m < 2 && combine == CombineMode::MaxPool)
        hyper.m = 2;  // max-pool across a single factor would be the identity

      const EncodedInstance enc = encode(inst, vocab, hyper);
      Rng init_rng(seed + 17);
      const ModelParams params = init_params(hyper, vocab, init_rng);

      const std::vector<EncodedInstance> batch{enc};
      auto f = [&]() {
        params.zero_grads();
        ad::Tape tape;
        Rng drop_rng(seed + 29);
        ad::Tensor loss = nll_batch(tape, batch, params, hyper, drop_rng);
        tape.backward(loss);
        return loss.value();
      };
      VariantCheck check;
      check.attention_variant = to_string(variant);
      check.combine_mode = to_string(combine);
      check.report = ad::finite_difference_check(f, params.named(), eps, samples, seed + 41);
      checks.push_back(std::move(check));
    }
  }
  return checks;
}

int cmd_gradcheck(const RunConfig& cfg) {
  const double eps = cfg.get_double("gradcheck_eps");
  const double tol = cfg.get_double("gradcheck_tol");
  const int samples = cfg.get_int("gradcheck_samples");

  const auto checks = run_model_gradcheck(cfg.hyper(), cfg.get_u64("seed"), eps, samples);
  bool ok = true;
  for (const VariantCheck& check : checks) {
    std::cout << "variant " << check.attention_variant << " x " << check.combine_mode << "\n";
    for (const auto& p : check.report.params)
      std::cout << "  " << p.name << "  max_rel_err " << p.max_rel_err << "  (" << p.coords_checked
                << " coords)\n";
    const bool pass = check.report.within(tol);
    ok = ok && pass;
    std::cout << "  -> " << (pass ? "PASS" : "FAIL") << " (max " << check.report.max_rel_err
              << " at " << check.report.worst_param << ", tolerance " << tol << ")\n";
  }
  if (!ok) {
    std::cerr << "gradient check failed\n";
    return kExitVerification;
  }
  std::cout << "all variants pass at tolerance " << tol << "\n";
  return kExitOk;
}

}  // namespace relex
