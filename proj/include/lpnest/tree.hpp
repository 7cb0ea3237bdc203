#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lpnest {

// Exponents are clamped to this range when trees are parsed or fitted,
// keeping v^p terms representable.
inline constexpr double kMinExponent = 1e-3;
inline constexpr double kMaxExponent = 1e3;

// A node identifier as the sequence of 0-based child indices from the root;
// the root itself is the empty path.
using NodePath = std::vector<int>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// Tree-structured cascade of L_p norms. Inner nodes carry an exponent and
// have at least two children; leaves carry dimension indices which cover
// 0..n-1 in left-to-right order. Immutable after construction.
class LpTree {
 public:
  struct Node {
    double p = 1.0;       // exponent; leaves keep the fixed value 1
    int leaf_index = -1;  // >= 0 iff leaf
    int parent = -1;
    int first_child = -1;
    int next_sibling = -1;
    int child_count = 0;
    int leaf_count = 1;    // n_I
    int first_leaf = 0;    // smallest leaf index in the subtree
    int subtree_end = 0;   // one past the preorder range of the subtree
    bool is_leaf() const { return leaf_index >= 0; }
  };

  // Grammar:  node := UINT | "(" REAL ws node (ws node)+ ")"
  static LpTree parse(std::string_view text);

  // Flat n-leaf L_p norm.
  static LpTree flat(int n, double p);

  // Canonical text form: single spaces, shortest exponent literals.
  std::string serialize() const;

  int dimension() const { return n_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  static constexpr int root_id() { return 0; }

  // Preorder ids of the inner nodes; gradient vectors over exponents use
  // this ordering.
  const std::vector<int>& inner_ids() const { return inner_ids_; }
  int inner_count() const { return static_cast<int>(inner_ids_.size()); }
  // Position of inner node `id` within inner_ids().
  int inner_offset(int id) const;

  NodePath path_of(int id) const;
  int id_of(const NodePath& path) const;

  std::vector<int> children(int id) const;

  // Ids along the root-to-rightmost-leaf path, root first.
  const std::vector<int>& rightmost_path() const { return spine_; }

  // Copy with the exponents replaced (inner_ids order); values are clamped
  // to the legal exponent range.
  LpTree with_exponents(std::span<const double> p) const;
  std::vector<double> exponents() const;

  // Splices every inner node whose exponent is within tol of its parent's
  // into that parent (children promoted), working bottom-up.
  LpTree simplified(double tol) const;

 private:
  explicit LpTree(std::vector<Node> nodes);
  void finalize();

  std::vector<Node> nodes_;  // preorder
  std::vector<int> inner_ids_;
  std::vector<int> spine_;
  int n_ = 0;
};

// Function values v_I at every node for one input vector.
class NodeValues {
 public:
  NodeValues(const LpTree& tree, std::vector<double> values)
      : tree_(&tree), v_(std::move(values)) {}

  double root() const { return v_[0]; }
  double value(int id) const { return v_[static_cast<std::size_t>(id)]; }
  double value(const NodePath& path) const { return v_[static_cast<std::size_t>(tree_->id_of(path))]; }
  const std::vector<double>& all() const { return v_; }
  const LpTree& tree() const { return *tree_; }

 private:
  const LpTree* tree_;
  std::vector<double> v_;
};

// f(x); throws std::invalid_argument on dimension mismatch.
double evaluate(const LpTree& tree, std::span<const double> x);

// f_I(x_I) for the subtree rooted at `id`; x is the full n-vector and only
// the subtree's own leaves are read.
double evaluate_subtree(const LpTree& tree, int id, std::span<const double> x);

// f(x) together with every intermediate node value.
NodeValues evaluate_nodes(const LpTree& tree, std::span<const double> x);

// d f / d y_i for all i. Sub-derivative 0 wherever the recursion hits a
// zero node value (in particular at y_i = 0).
std::vector<double> gradient_x(const LpTree& tree, std::span<const double> y);

// d f / d p_J for every inner node J, in inner_ids() order. Uses the
// 0 * log 0 := 0 convention; a zero v_J contributes 0.
std::vector<double> gradient_p(const LpTree& tree, std::span<const double> x);

}  // namespace lpnest
