#include "relex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "relex/deptree.hpp"

namespace relex {

using nlohmann::json;

void Instance::validate() const {
  const int len = n();
  if (len < 1) throw std::invalid_argument("instance has no tokens");
  auto check_span = [len](const Span& s, const char* which) {
    if (s.start < 0 || s.start > s.end || s.end >= len)
      throw std::invalid_argument(std::string(which) + " span (" + std::to_string(s.start) + "," +
                                  std::to_string(s.end) + ") outside sentence of " +
                                  std::to_string(len) + " tokens");
  };
  check_span(entity1, "entity1");
  check_span(entity2, "entity2");
  if (entity1.overlaps(entity2))
    throw std::invalid_argument("entity spans overlap: (" + std::to_string(entity1.start) + "," +
                                std::to_string(entity1.end) + ") and (" +
                                std::to_string(entity2.start) + "," + std::to_string(entity2.end) +
                                ")");
  if (static_cast<int>(dep_heads.size()) != len)
    throw std::invalid_argument("dep_heads has " + std::to_string(dep_heads.size()) +
                                " entries for " + std::to_string(len) + " tokens");
  int roots = 0;
  for (int i = 0; i < len; ++i) {
    const int h = dep_heads[i];
    if (h == -1) {
      ++roots;
      continue;
    }
    if (h < -1 || h >= len)
      throw std::invalid_argument("dep_heads[" + std::to_string(i) + "] = " + std::to_string(h) +
                                  " outside [-1, " + std::to_string(len - 1) + "]");
    if (h == i)
      throw std::invalid_argument("dep_heads[" + std::to_string(i) + "] is a self-loop");
  }
  if (roots != 1)
    throw std::invalid_argument("expected exactly one root (-1), found " + std::to_string(roots));
  build_tree(dep_heads);  // rejects cycles and disconnected components at ingest
}

// ------------------------------------------------------------------ Vocab

Vocab::Vocab() {
  add_token("<PAD>");
  add_token("<UNK>");
  add_label(kNoneName);
}

int Vocab::add_token(const std::string& tok) {
  auto [it, inserted] = token_ids_.try_emplace(tok, num_tokens());
  if (inserted) tokens_by_id_.push_back(tok);
  return it->second;
}

int Vocab::add_label(const std::string& label) {
  auto [it, inserted] = label_ids_.try_emplace(label, num_labels());
  if (inserted) labels_by_id_.push_back(label);
  return it->second;
}

int Vocab::token_id(const std::string& tok) const {
  auto it = token_ids_.find(tok);
  return it == token_ids_.end() ? kUnk : it->second;
}

int Vocab::label_id(const std::string& label) const {
  auto it = label_ids_.find(label);
  return it == label_ids_.end() ? -1 : it->second;
}

bool Vocab::has_token(const std::string& tok) const { return token_ids_.count(tok) > 0; }

const std::string& Vocab::label_name(int id) const {
  if (id < 0 || id >= num_labels())
    throw std::out_of_range("label id " + std::to_string(id) + " outside " +
                            std::to_string(num_labels()) + " labels");
  return labels_by_id_[id];
}

const std::string& Vocab::token_name(int id) const {
  if (id < 0 || id >= num_tokens())
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_by_id_[id];
}

std::string Vocab::to_json_string() const {
  json j;
  j["tokens"] = json::object();
  j["labels"] = json::object();
  for (const auto& [tok, id] : token_ids_) j["tokens"][tok] = id;
  for (const auto& [lab, id] : label_ids_) j["labels"][lab] = id;
  return j.dump();
}

Vocab Vocab::from_json_string(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object() || !j.contains("tokens") || !j.contains("labels"))
    throw std::runtime_error("vocab JSON must contain tokens and labels objects");
  Vocab v;
  auto fill = [](const json& obj, auto&& add, int already, const char* what) {
    std::vector<std::pair<int, std::string>> by_id;
    for (auto it = obj.begin(); it != obj.end(); ++it)
      by_id.emplace_back(it.value().get<int>(), it.key());
    std::sort(by_id.begin(), by_id.end());
    for (const auto& [id, name] : by_id) {
      if (id < already) continue;  // reserved entries already present
      const int got = add(name);
      if (got != id)
        throw std::runtime_error(std::string("vocab JSON ids for ") + what +
                                 " are not dense: expected " + std::to_string(got) + " got " +
                                 std::to_string(id));
    }
  };
  fill(j["tokens"], [&v](const std::string& s) { return v.add_token(s); }, 2, "tokens");
  fill(j["labels"], [&v](const std::string& s) { return v.add_label(s); }, 1, "labels");
  return v;
}

// ------------------------------------------------------------- ingestion

static Span parse_span(const json& j, const char* which) {
  if (!j.is_object() || !j.contains("start") || !j.contains("end"))
    throw std::invalid_argument(std::string(which) + " must be an object with start and end");
  return Span{j["start"].get<int>(), j["end"].get<int>()};
}

Instance parse_instance_line(const std::string& text, bool require_relation) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("instance line is not a JSON object");
  for (const char* key : {"tokens", "entity1", "entity2", "dep_heads"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing key: ") + key);
  if (require_relation && !j.contains("relation"))
    throw std::invalid_argument("missing key: relation");

  Instance inst;
  try {
    inst.tokens = j["tokens"].get<std::vector<std::string>>();
    inst.dep_heads = j["dep_heads"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad field type: ") + e.what());
  }
  inst.entity1 = parse_span(j["entity1"], "entity1");
  inst.entity2 = parse_span(j["entity2"], "entity2");
  if (j.contains("relation")) {
    if (!j["relation"].is_string())
      throw std::invalid_argument("relation must be a string");
    inst.relation = j["relation"].get<std::string>();
  }
  inst.validate();
  return inst;
}

LoadResult load_corpus(const std::string& path, bool lenient) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.instances.push_back(parse_instance_line(line));
    } catch (const std::exception& e) {
      if (lenient) {
        ++result.skipped;
      } else {
        throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  return result;
}

Vocab build_vocab(const std::vector<Instance>& train, int min_count) {
  if (train.empty()) throw std::invalid_argument("build_vocab: empty training set");
  std::map<std::string, int> freq;
  for (const Instance& inst : train)
    for (const std::string& tok : inst.tokens) ++freq[tok];

  Vocab vocab;
  for (const Instance& inst : train) {
    for (const std::string& tok : inst.tokens)
      if (freq[tok] >= min_count) vocab.add_token(tok);
    vocab.add_label(inst.relation);
  }
  return vocab;
}

// ----------------------------------------------------------- embeddings

EmbeddingTable load_word2vec_text(const std::string& path, const Vocab& vocab, int dim, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);

  EmbeddingTable table;
  table.vocab_size = vocab.num_tokens();
  table.dim = dim;
  table.matrix.assign(static_cast<std::size_t>(table.vocab_size) * dim, 0.0);
  // seed every non-PAD row first so the random draws do not depend on file
  // content; file rows then overwrite
  for (int r = Vocab::kUnk; r < table.vocab_size; ++r)
    for (int c = 0; c < dim; ++c)
      table.matrix[static_cast<std::size_t>(r) * dim + c] = rng.uniform(-0.25, 0.25);

  auto split_ws = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
  };
  auto parse_num = [](const std::string& s, std::size_t lineno) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("embedding file line " + std::to_string(lineno) +
                               ": non-numeric field '" + s + "'");
    }
    if (used != s.size())
      throw std::runtime_error("embedding file line " + std::to_string(lineno) +
                               ": non-numeric field '" + s + "'");
    return v;
  };

  std::string line;
  std::size_t lineno = 0;
  long header_count = -1;
  std::size_t data_lines = 0;
  int found = 0;

  auto handle_row = [&](const std::vector<std::string>& fields, std::size_t ln) {
    if (static_cast<int>(fields.size()) != dim + 1)
      throw std::runtime_error("embedding file line " + std::to_string(ln) + ": expected " +
                               std::to_string(dim) + " values, found " +
                               std::to_string(fields.size() - 1));
    ++data_lines;
    if (!vocab.has_token(fields[0])) {
      for (std::size_t i = 1; i < fields.size(); ++i) parse_num(fields[i], ln);
      return;
    }
    const int id = vocab.token_id(fields[0]);
    for (int c = 0; c < dim; ++c)
      table.matrix[static_cast<std::size_t>(id) * dim + c] = parse_num(fields[c + 1], ln);
    ++found;
  };

  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2 &&
          fields[0].find_first_not_of("0123456789") == std::string::npos &&
          fields[1].find_first_not_of("0123456789") == std::string::npos) {
        header_count = std::stol(fields[0]);
        const int header_dim = static_cast<int>(std::stol(fields[1]));
        if (header_dim != dim)
          throw std::runtime_error("embedding file declares dimension " +
                                   std::to_string(header_dim) + " but configuration expects " +
                                   std::to_string(dim));
        continue;
      }
    }
    handle_row(fields, lineno);
  }

  if (header_count >= 0 && header_count != static_cast<long>(data_lines))
    table.warning = "header declares " + std::to_string(header_count) + " words but file has " +
                    std::to_string(data_lines);

  // PAD stays zero regardless of file content
  std::fill_n(table.matrix.begin(), dim, 0.0);
  const int real_words = std::max(1, vocab.num_tokens() - 2);
  table.coverage = static_cast<double>(found) / real_words;
  return table;
}

// --------------------------------------------------------------- encode

int positional_bucket(int i, int entity_start, int max_pos) {
  const int rel = i - entity_start;
  return std::clamp(rel, -max_pos, max_pos) + max_pos;
}

Span EncodedInstance::entity_span(int which) const {
  const int mark = which == 1 ? 1 : 2;
  int first = -1, last = -1;
  for (int i = 0; i < n(); ++i)
    if (indicator_ids[i] == mark) {
      if (first == -1) first = i;
      last = i;
    }
  if (first == -1) throw std::logic_error("encoded instance has no entity " + std::to_string(which));
  return Span{first, last};
}

EncodedInstance encode(const Instance& inst, const Vocab& vocab, const HyperParams& hyper) {
  const int n = inst.n();
  EncodedInstance enc;
  enc.word_ids.resize(n);
  enc.indicator_ids.assign(n, 0);
  enc.pos1_ids.resize(n);
  enc.pos2_ids.resize(n);

  for (int i = 0; i < n; ++i) {
    enc.word_ids[i] = vocab.token_id(inst.tokens[i]);
    enc.pos1_ids[i] = positional_bucket(i, inst.entity1.start, hyper.max_pos);
    enc.pos2_ids[i] = positional_bucket(i, inst.entity2.start, hyper.max_pos);
  }
  for (int i = inst.entity1.start; i <= inst.entity1.end; ++i) enc.indicator_ids[i] = 1;
  for (int i = inst.entity2.start; i <= inst.entity2.end; ++i) enc.indicator_ids[i] = 2;

  const int w = hyper.context_window;
  enc.ent1_ctx = Span{std::max(0, inst.entity1.start - w), std::min(n - 1, inst.entity1.end + w)};
  enc.ent2_ctx = Span{std::max(0, inst.entity2.start - w), std::min(n - 1, inst.entity2.end + w)};

  const DepTree tree = build_tree(inst.dep_heads);
  enc.dep_dist1 = token_distances(tree, entity_head_index(inst.entity1));
  enc.dep_dist2 = token_distances(tree, entity_head_index(inst.entity2));

  enc.label_id = inst.relation.empty() ? -1 : vocab.label_id(inst.relation);
  return enc;
}

}  // namespace relex
