#include "relex/deptree.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace relex {

DepTree build_tree(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  if (n < 1) throw std::invalid_argument("build_tree: empty head array");

  DepTree tree;
  tree.heads = heads;
  tree.adj.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const int h = heads[i];
    if (h == -1) {
      if (tree.root != -1)
        throw std::invalid_argument("build_tree: multiple roots at tokens " +
                                    std::to_string(tree.root) + " and " + std::to_string(i));
      tree.root = i;
      continue;
    }
    if (h < 0 || h >= n)
      throw std::invalid_argument("build_tree: head " + std::to_string(h) + " of token " +
                                  std::to_string(i) + " outside [0, " + std::to_string(n - 1) +
                                  "]");
    if (h == i) throw std::invalid_argument("build_tree: token " + std::to_string(i) +
                                            " is its own head");
    tree.adj[i].push_back(h);
    tree.adj[h].push_back(i);
  }
  if (tree.root == -1) throw std::invalid_argument("build_tree: no root (-1) entry");

  // n-1 edges plus full reachability from the root rules out cycles
  std::vector<char> seen(n, 0);
  std::deque<int> queue{tree.root};
  seen[tree.root] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    ++reached;
    for (int v : tree.adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
  }
  if (reached != n) {
    for (int i = 0; i < n; ++i)
      if (!seen[i])
        throw std::invalid_argument("build_tree: cycle or disconnected component containing token " +
                                    std::to_string(i));
  }
  return tree;
}

std::vector<int> token_distances(const DepTree& tree, int src) {
  const int n = tree.n();
  if (src < 0 || src >= n)
    throw std::out_of_range("token_distances: src " + std::to_string(src) + " outside sentence of " +
                            std::to_string(n) + " tokens");
  std::vector<int> dist(n, -1);
  std::deque<int> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : tree.adj[u])
      if (dist[v] == -1) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

int entity_head_index(const Span& span) { return span.end; }

double dep_weight(int l, int ws, bool literal_zero) {
  if (l < 0) throw std::invalid_argument("dep_weight: negative distance");
  if (ws < 1) throw std::invalid_argument("dep_weight: window must be >= 1");
  if (l == 0) return literal_zero ? std::pow(0.5, ws) : 1.0;
  if (l <= ws) return std::pow(0.5, l - 1);
  return std::pow(0.5, ws);
}

std::vector<char> attention_mask(const std::vector<int>& l1, const std::vector<int>& l2, int ws,
                                 const Span& entity1, const Span& entity2) {
  if (l1.size() != l2.size())
    throw std::invalid_argument("attention_mask: distance lengths disagree (" +
                                std::to_string(l1.size()) + " vs " + std::to_string(l2.size()) +
                                ")");
  const int n = static_cast<int>(l1.size());
  std::vector<char> keep(n, 0);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    keep[i] = (l1[i] + l2[i] <= 2 * ws);  // average <= ws, in integers
    any = any || keep[i];
  }
  if (!any) {
    for (int i = entity1.start; i <= entity1.end && i < n; ++i) keep[i] = 1;
    for (int i = entity2.start; i <= entity2.end && i < n; ++i) keep[i] = 1;
  }
  return keep;
}

}  // namespace relex
