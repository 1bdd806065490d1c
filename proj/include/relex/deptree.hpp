#pragma once

#include <vector>

#include "relex/corpus_types.hpp"

namespace relex {

// Validated dependency tree over one sentence. Edges are treated as
// undirected for every distance query.
struct DepTree {
  std::vector<int> heads;             // -1 marks the single root
  std::vector<std::vector<int>> adj;  // undirected adjacency
  int root = -1;

  int n() const { return static_cast<int>(heads.size()); }
};

// Rejects multiple/missing roots, self-loops, out-of-range heads, cycles and
// disconnected nodes.
DepTree build_tree(const std::vector<int>& heads);

// BFS edge counts from src to every token. The tree is connected, so every
// value is finite.
std::vector<int> token_distances(const DepTree& tree, int src);

// An entity's head token is its last token.
int entity_head_index(const Span& span);

// Distance weight factor: 1/2^(l-1) for l in [1, ws], 1/2^ws beyond the
// window. l == 0 is the entity head itself and maps to 1.0 unless
// literal_zero is set, in which case the out-of-window branch applies.
double dep_weight(int l, int ws, bool literal_zero = false);

// keep[i] is true when the average of the two distances is at most ws,
// i.e. l1[i] + l2[i] <= 2*ws. If the rule masks every token (entities more
// than 2*ws apart), the two entity spans are force-kept so normalization
// always has support.
std::vector<char> attention_mask(const std::vector<int>& l1, const std::vector<int>& l2, int ws,
                                 const Span& entity1, const Span& entity2);

}  // namespace relex
