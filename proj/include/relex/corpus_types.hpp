#pragma once

#include <map>
#include <string>
#include <vector>

namespace relex {

// Inclusive token span, 0-based.
struct Span {
  int start = 0;
  int end = 0;

  bool operator==(const Span&) const = default;
  int length() const { return end - start + 1; }
  bool overlaps(const Span& o) const { return start <= o.end && o.start <= end; }
};

// One sentence with two marked entities, a head array and a relation label.
struct Instance {
  std::vector<std::string> tokens;
  Span entity1;
  Span entity2;
  std::vector<int> dep_heads;  // exactly one entry is -1 (the root)
  std::string relation;

  int n() const { return static_cast<int>(tokens.size()); }

  // Enforces every structural invariant, including tree validity.
  void validate() const;
};

// Token and label id maps. PAD=0 and UNK=1 are reserved token ids; the None
// relation is always label 0. Ids are dense and assignment order is the
// first occurrence in the training corpus, which keeps save/load stable.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kNoneLabel = 0;
  static constexpr const char* kNoneName = "None";

  Vocab();

  int add_token(const std::string& tok);  // existing id if already present
  int add_label(const std::string& label);

  int token_id(const std::string& tok) const;  // UNK when absent
  int label_id(const std::string& label) const;  // -1 when absent
  bool has_token(const std::string& tok) const;
  const std::string& label_name(int id) const;
  const std::string& token_name(int id) const;

  int num_tokens() const { return static_cast<int>(tokens_by_id_.size()); }
  int num_labels() const { return static_cast<int>(labels_by_id_.size()); }

  std::string to_json_string() const;
  static Vocab from_json_string(const std::string& text);

 private:
  std::map<std::string, int> token_ids_;
  std::map<std::string, int> label_ids_;
  std::vector<std::string> tokens_by_id_;
  std::vector<std::string> labels_by_id_;
};

// Index streams the network consumes. label_id is -1 when the relation is
// absent from the vocabulary (or absent altogether at prediction time).
struct EncodedInstance {
  std::vector<int> word_ids;
  std::vector<int> indicator_ids;  // 0 neither, 1 entity1, 2 entity2
  std::vector<int> pos1_ids;
  std::vector<int> pos2_ids;
  Span ent1_ctx;
  Span ent2_ctx;
  std::vector<int> dep_dist1;
  std::vector<int> dep_dist2;
  int label_id = -1;

  int n() const { return static_cast<int>(word_ids.size()); }

  // spans recovered from the indicator stream
  Span entity_span(int which) const;
};

// Word embedding matrix aligned to a Vocab. Row 0 (PAD) stays all zeros.
struct EmbeddingTable {
  std::vector<double> matrix;  // vocab_size x dim, row-major
  int vocab_size = 0;
  int dim = 0;
  double coverage = 0.0;  // fraction of non-reserved vocab words found in file
  std::string warning;    // non-empty when the header count disagreed
};

}  // namespace relex
