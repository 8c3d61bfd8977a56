#include "mpqa/graph.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace mpqa {

int node_type_index(NodeType t) { return static_cast<int>(t); }

char node_type_char(NodeType t) {
  switch (t) {
    case NodeType::Z: return 'Z';
    case NodeType::Q: return 'Q';
    case NodeType::A: return 'A';
    case NodeType::O: return 'O';
  }
  throw GraphError("bad NodeType value");
}

NodeType node_type_from_char(char c) {
  switch (c) {
    case 'Z': return NodeType::Z;
    case 'Q': return NodeType::Q;
    case 'A': return NodeType::A;
    case 'O': return NodeType::O;
  }
  throw GraphError(std::string("unknown node type '") + c + "'");
}

std::array<double, kNodeTypeCount> one_hot(NodeType t) {
  std::array<double, kNodeTypeCount> v{};
  v[node_type_index(t)] = 1.0;
  return v;
}

const Node* Subgraph::find_node(int id) const {
  for (const Node& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Node& Subgraph::node_by_id(int id) const {
  const Node* n = find_node(id);
  if (n == nullptr) throw DanglingEdge("no node with id " + std::to_string(id));
  return *n;
}

bool Subgraph::has_context_node() const {
  return std::any_of(nodes.begin(), nodes.end(),
                     [](const Node& n) { return n.type == NodeType::Z; });
}

int Subgraph::node_feature_dim() const {
  return nodes.empty() ? 0 : static_cast<int>(nodes.front().feature.size());
}

void validate(const Subgraph& g) {
  if (g.num_relations < 0) throw InvalidSubgraph("num_relations is negative");

  std::unordered_map<int, const Node*> by_id;
  int z_count = 0;
  const size_t feat_dim = g.nodes.empty() ? 0 : g.nodes.front().feature.size();
  for (const Node& n : g.nodes) {
    if (!by_id.emplace(n.id, &n).second) {
      throw DuplicateNodeId("node id " + std::to_string(n.id) + " appears more than once");
    }
    if (n.feature.size() != feat_dim) {
      throw InvalidSubgraph("node " + std::to_string(n.id) + " has feature dim " +
                            std::to_string(n.feature.size()) + ", expected " +
                            std::to_string(feat_dim));
    }
    if (n.type == NodeType::Z) ++z_count;
  }
  if (z_count > 1) {
    throw MultipleContextNodes(std::to_string(z_count) + " context nodes present");
  }

  for (size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (!by_id.count(e.head)) {
      throw DanglingEdge("edge " + std::to_string(i) + " head " + std::to_string(e.head) +
                         " is not a node");
    }
    if (!by_id.count(e.tail)) {
      throw DanglingEdge("edge " + std::to_string(i) + " tail " + std::to_string(e.tail) +
                         " is not a node");
    }
    if (e.relation < 0 || e.relation > g.context_relation()) {
      throw RelationOutOfRange("edge " + std::to_string(i) + " relation " +
                               std::to_string(e.relation) + " outside [0, " +
                               std::to_string(g.context_relation()) + "]");
    }
  }

  auto check_anchors = [&](const std::vector<int>& ids, NodeType want, const char* label) {
    for (int id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw InvalidSubgraph(std::string(label) + " anchor " + std::to_string(id) +
                              " is not a node");
      }
      if (it->second->type != want) {
        throw InvalidSubgraph(std::string(label) + " anchor " + std::to_string(id) +
                              " has the wrong node type");
      }
    }
  };
  check_anchors(g.q_nodes, NodeType::Q, "question");
  check_anchors(g.a_nodes, NodeType::A, "answer");

  std::unordered_set<int> qset(g.q_nodes.begin(), g.q_nodes.end());
  for (int id : g.a_nodes) {
    if (qset.count(id)) {
      throw InvalidSubgraph("node " + std::to_string(id) + " is both a question and answer anchor");
    }
  }
}

Subgraph insert_context_node(const Subgraph& g) {
  if (g.has_context_node()) throw AlreadyHasContext("subgraph already has a context node");

  Subgraph out = g;
  int max_id = -1;
  for (const Node& n : g.nodes) max_id = std::max(max_id, n.id);

  Node z;
  z.id = max_id + 1;
  z.type = NodeType::Z;
  z.feature.assign(g.node_feature_dim(), 0.0);
  for (const Node& n : g.nodes) {
    for (size_t i = 0; i < z.feature.size(); ++i) z.feature[i] += n.feature[i];
  }
  if (!g.nodes.empty()) {
    for (double& v : z.feature) v /= static_cast<double>(g.nodes.size());
  }
  out.nodes.push_back(z);

  std::set<int> anchors(g.q_nodes.begin(), g.q_nodes.end());
  anchors.insert(g.a_nodes.begin(), g.a_nodes.end());
  const int rel = g.context_relation();
  for (int v : anchors) {
    out.edges.push_back({z.id, rel, v});
    out.edges.push_back({v, rel, z.id});
  }
  return out;
}

int inverse_relation(int relation, int num_relations) {
  if (relation == 2 * num_relations) return relation;  // context edges are symmetric
  if (relation < 0 || relation >= 2 * num_relations) {
    throw RelationOutOfRange("relation " + std::to_string(relation) + " outside [0, " +
                             std::to_string(2 * num_relations) + "]");
  }
  return relation < num_relations ? relation + num_relations : relation - num_relations;
}

Subgraph add_inverse_edges(const Subgraph& g) {
  Subgraph out = g;
  out.edges.clear();
  out.edges.reserve(2 * g.edges.size());
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.relation == g.context_relation()) {
      out.edges.push_back(e);
      continue;
    }
    if (e.relation < 0 || e.relation >= g.num_relations) {
      throw RelationOutOfRange("edge " + std::to_string(i) + " relation " +
                               std::to_string(e.relation) +
                               " is not a base relation; graph looks already doubled");
    }
    out.edges.push_back(e);
    out.edges.push_back({e.tail, e.relation + g.num_relations, e.head});
  }
  return out;
}

}  // namespace mpqa
