#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpqa {

// Node roles: Z is the synthetic context hub wired to every question/answer
// anchor, Q/A are question/answer anchors, O is everything else.
enum class NodeType { Z, Q, A, O };

constexpr int kNodeTypeCount = 4;

int node_type_index(NodeType t);
char node_type_char(NodeType t);
NodeType node_type_from_char(char c);

/// One-hot over (Z, Q, A, O); always sums to 1.
std::array<double, kNodeTypeCount> one_hot(NodeType t);

struct GraphError : std::runtime_error {
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};
struct DanglingEdge : GraphError {
  explicit DanglingEdge(const std::string& what) : GraphError(what) {}
};
struct DuplicateNodeId : GraphError {
  explicit DuplicateNodeId(const std::string& what) : GraphError(what) {}
};
struct RelationOutOfRange : GraphError {
  explicit RelationOutOfRange(const std::string& what) : GraphError(what) {}
};
struct MultipleContextNodes : GraphError {
  explicit MultipleContextNodes(const std::string& what) : GraphError(what) {}
};
struct AlreadyHasContext : GraphError {
  explicit AlreadyHasContext(const std::string& what) : GraphError(what) {}
};
struct InvalidSubgraph : GraphError {
  explicit InvalidSubgraph(const std::string& what) : GraphError(what) {}
};

struct Node {
  int id = 0;
  NodeType type = NodeType::O;
  std::string surface;          // entity phrase, words joined by underbars
  std::vector<double> feature;  // d_node floats

  bool operator==(const Node&) const = default;
};

/// relation ids: [0, |R|) base relations, [|R|, 2|R|) their inverses,
/// 2|R| the reserved context-hub relation.
struct Edge {
  int head = 0;
  int relation = 0;
  int tail = 0;
  bool operator==(const Edge&) const = default;
};

/// Per-question multi-relational subgraph. Treated as immutable once built;
/// operations below return fresh copies.
struct Subgraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int num_relations = 0;     // |R|, base relations only
  std::vector<int> q_nodes;  // question anchors (ids)
  std::vector<int> a_nodes;  // answer anchors (ids)

  int context_relation() const { return 2 * num_relations; }
  /// Size of the full relation id space: base + inverse + context.
  int relation_vocab() const { return 2 * num_relations + 1; }

  const Node* find_node(int id) const;      // nullptr when absent
  const Node& node_by_id(int id) const;     // DanglingEdge when absent
  bool has_context_node() const;
  int node_feature_dim() const;             // 0 for an empty graph

  bool operator==(const Subgraph&) const = default;
};

/// Checks every structural invariant; throws the matching error naming the
/// offending node or edge. Relations must lie in [0, 2|R|] (context id
/// included, since validation also runs after context insertion).
void validate(const Subgraph& g);

/// Returns a copy with one Z node (id = max id + 1) whose feature is the mean
/// of all node features, linked to every anchor in both directions with the
/// reserved context relation. Throws AlreadyHasContext on a second call.
Subgraph insert_context_node(const Subgraph& g);

/// r <-> r + |R| for base/inverse pairs; the context relation maps to itself.
int inverse_relation(int relation, int num_relations);

/// Load-time canonicalization: every stored base edge (r < |R|) is followed
/// immediately by its inverse (tail, r+|R|, head). Context edges pass through
/// unchanged. Input containing ids in [|R|, 2|R|) is rejected as already
/// doubled.
Subgraph add_inverse_edges(const Subgraph& g);

}  // namespace mpqa
