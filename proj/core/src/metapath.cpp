#include "mpqa/metapath.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace mpqa {

bool path_less(const MetaPath& a, const MetaPath& b) {
  if (a.hops() != b.hops()) return a.hops() < b.hops();
  if (a.head() != b.head()) return a.head() < b.head();
  if (a.relations != b.relations) return a.relations < b.relations;
  return a.node_ids < b.node_ids;
}

int path_feature_dim(int hops, int num_relations, int d_node) {
  return (hops + 1) * kNodeTypeCount + hops * (2 * num_relations + 1) + d_node;
}

namespace {

struct Walker {
  int max_hops;
  bool has_z;
  int z_id;  // context-hub node id, meaningful only when has_z
  const std::unordered_map<int, std::vector<const Edge*>>& adjacency;
  const std::unordered_set<int>& goal;  // anchors of the opposite role
  std::vector<MetaPath>& out;

  std::vector<int> node_stack;
  std::vector<int> rel_stack;
  std::unordered_set<int> visited;

  void extend(int node, int depth) {
    if (depth == max_hops) return;
    auto it = adjacency.find(node);
    if (it == adjacency.end()) return;
    for (const Edge* e : it->second) {
      if (visited.count(e->tail)) continue;
      // The context hub would connect everything within two hops; it is not a
      // real entity, so it never takes part in multi-hop paths.
      if (has_z && e->tail == z_id) continue;
      node_stack.push_back(e->tail);
      rel_stack.push_back(e->relation);
      visited.insert(e->tail);
      if (depth + 1 >= 2 && goal.count(e->tail)) {
        out.push_back({node_stack, rel_stack});
      }
      extend(e->tail, depth + 1);
      visited.erase(e->tail);
      rel_stack.pop_back();
      node_stack.pop_back();
    }
  }
};

}  // namespace

std::vector<MetaPath> enumerate_paths(const Subgraph& g, int max_hops) {
  std::vector<MetaPath> out;

  for (const Edge& e : g.edges) {
    if (e.head == e.tail) continue;  // self-loops cannot be simple paths
    out.push_back({{e.head, e.tail}, {e.relation}});
  }

  if (max_hops >= 2) {
    std::unordered_map<int, std::vector<const Edge*>> adjacency;
    for (const Edge& e : g.edges) {
      if (e.head == e.tail) continue;
      adjacency[e.head].push_back(&e);
    }
    const std::unordered_set<int> qset(g.q_nodes.begin(), g.q_nodes.end());
    const std::unordered_set<int> aset(g.a_nodes.begin(), g.a_nodes.end());
    bool has_z = false;
    int z_id = 0;
    for (const Node& n : g.nodes) {
      if (n.type == NodeType::Z) {
        has_z = true;
        z_id = n.id;
      }
    }

    auto walk_from = [&](const std::vector<int>& starts, const std::unordered_set<int>& goal) {
      for (int start : starts) {
        Walker w{max_hops, has_z, z_id, adjacency, goal, out, {start}, {}, {start}};
        w.extend(start, 0);
      }
    };
    walk_from(g.q_nodes, aset);
    walk_from(g.a_nodes, qset);
  }

  std::sort(out.begin(), out.end(), path_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

RawPathFeature featurize(const MetaPath& path, const Subgraph& g) {
  if (path.node_ids.size() != path.relations.size() + 1 || path.relations.empty()) {
    throw NodeMissing("malformed path: " + std::to_string(path.node_ids.size()) + " nodes, " +
                      std::to_string(path.relations.size()) + " relations");
  }
  const int k = path.hops();
  const int rel_vocab = g.relation_vocab();
  const int d_node = g.node_feature_dim();

  RawPathFeature out;
  out.hops = k;
  out.vector.assign(path_feature_dim(k, g.num_relations, d_node), 0.0);

  size_t off = 0;
  for (int i = 0; i <= k; ++i) {
    const Node* n = g.find_node(path.node_ids[i]);
    if (n == nullptr) {
      throw NodeMissing("path node " + std::to_string(path.node_ids[i]) + " is not in the graph");
    }
    out.vector[off + node_type_index(n->type)] = 1.0;
    off += kNodeTypeCount;
    if (i < k) {
      const int r = path.relations[i];
      if (r < 0 || r >= rel_vocab) {
        throw RelationOutOfRange("path relation " + std::to_string(r) + " outside [0, " +
                                 std::to_string(rel_vocab - 1) + "]");
      }
      out.vector[off + r] = 1.0;
      off += rel_vocab;
    }
  }

  const Node& head = g.node_by_id(path.head());
  const Node& tail = g.node_by_id(path.tail());
  for (int i = 0; i < d_node; ++i) out.vector[off + i] = tail.feature[i] - head.feature[i];
  return out;
}

}  // namespace mpqa
