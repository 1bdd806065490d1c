#pragma once

#include <string>
#include <vector>

#include "relex/corpus_types.hpp"
#include "relex/hyperparams.hpp"
#include "relex/rng.hpp"

namespace relex {

// Parses one JSON object with keys tokens, entity1, entity2, dep_heads,
// relation (span keys start/end) and validates every Instance invariant.
// The relation key may be omitted only when require_relation is false.
Instance parse_instance_line(const std::string& text, bool require_relation = true);

struct LoadResult {
  std::vector<Instance> instances;
  std::size_t skipped = 0;  // lenient mode only
};

// Newline-delimited JSON file, order preserved. Strict mode aborts on the
// first bad line with its line number; lenient mode skips and counts.
LoadResult load_corpus(const std::string& path, bool lenient = false);

// Token ids for tokens with frequency >= min_count (others encode to UNK);
// labels collected in first-occurrence order with None fixed at 0.
Vocab build_vocab(const std::vector<Instance>& train, int min_count = 1);

// word2vec text format: optional "V d" header, then "word v1 ... v_d" lines.
// Vocabulary words missing from the file get seeded uniform [-0.25, 0.25]
// rows; PAD stays zero. Dimension mismatches and non-numeric fields abort.
EmbeddingTable load_word2vec_text(const std::string& path, const Vocab& vocab, int dim, Rng& rng);

// clamp(i - entity_start, -max_pos, max_pos) + max_pos, so buckets lie in
// [0, 2*max_pos]
int positional_bucket(int i, int entity_start, int max_pos);

EncodedInstance encode(const Instance& inst, const Vocab& vocab, const HyperParams& hyper);

}  // namespace relex
