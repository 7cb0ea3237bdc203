#include "lpnest/tree.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "lpnest/instrument.hpp"

namespace lpnest {

namespace {

struct Builder {
  double p = 0.0;
  int leaf = -1;
  std::vector<Builder> children;
  bool is_leaf() const { return leaf >= 0; }
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Builder run() {
    skip_ws();
    Builder root = parse_node();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing characters after tree", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  Builder parse_node() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    if (peek() == '(') return parse_inner();
    return parse_leaf();
  }

  Builder parse_leaf() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected leaf index or '('", start);
    Builder b;
    b.leaf = std::stoi(std::string(text_.substr(start, pos_ - start)));
    return b;
  }

  Builder parse_inner() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_ws();
    const std::size_t num_start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    if (pos_ == num_start) throw ParseError("expected exponent after '('", num_start);
    double p;
    try {
      std::size_t used = 0;
      const std::string s(text_.substr(num_start, pos_ - num_start));
      p = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw ParseError("malformed exponent", num_start);
    }
    if (!(p > 0.0)) throw ParseError("exponent must be > 0", num_start);
    Builder b;
    b.p = std::clamp(p, kMinExponent, kMaxExponent);
    for (;;) {
      skip_ws();
      if (peek() == ')') break;
      if (pos_ >= text_.size()) throw ParseError("missing ')'", open);
      b.children.push_back(parse_node());
    }
    ++pos_;  // ')'
    if (b.children.size() < 2) {
      throw ParseError("inner node must have at least two children", open);
    }
    return b;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void flatten(const Builder& b, int parent, std::vector<LpTree::Node>& nodes) {
  const int id = static_cast<int>(nodes.size());
  LpTree::Node node;
  node.parent = parent;
  if (b.is_leaf()) {
    node.leaf_index = b.leaf;
  } else {
    node.p = b.p;
    node.child_count = static_cast<int>(b.children.size());
  }
  nodes.push_back(node);
  int prev = -1;
  for (const Builder& child : b.children) {
    const int cid = static_cast<int>(nodes.size());
    if (prev < 0) nodes[static_cast<std::size_t>(id)].first_child = cid;
    else nodes[static_cast<std::size_t>(prev)].next_sibling = cid;
    flatten(child, id, nodes);
    prev = cid;
  }
}

// Shortest decimal literal that round-trips; always carries a '.' or an
// exponent so the canonical text reads as a real.
std::string format_exponent(double p) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, p);
    if (std::stod(buf) == p) break;
  }
  std::string s(buf);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find('E') == std::string::npos) {
    s += ".0";
  }
  return s;
}

Builder to_builder(const LpTree& tree, int id) {
  const LpTree::Node& node = tree.node(id);
  Builder b;
  if (node.is_leaf()) {
    b.leaf = node.leaf_index;
    return b;
  }
  b.p = node.p;
  for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
    b.children.push_back(to_builder(tree, c));
  }
  return b;
}

void splice_equal(Builder& b, double tol) {
  if (b.is_leaf()) return;
  for (Builder& child : b.children) splice_equal(child, tol);
  std::vector<Builder> merged;
  merged.reserve(b.children.size());
  for (Builder& child : b.children) {
    if (!child.is_leaf() && std::fabs(child.p - b.p) <= tol) {
      for (Builder& grand : child.children) merged.push_back(std::move(grand));
    } else {
      merged.push_back(std::move(child));
    }
  }
  b.children = std::move(merged);
}

}  // namespace

LpTree::LpTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) { finalize(); }

void LpTree::finalize() {
  // Leaf counts (children precede nothing: preorder, so accumulate in
  // reverse), canonical leaf order, inner list and rightmost spine.
  const int count = node_count();
  int expected_leaf = 0;
  for (int id = 0; id < count; ++id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      if (node.leaf_index != expected_leaf) {
        throw ParseError("leaves must cover 0..n-1 in left-to-right order; found leaf " +
                             std::to_string(node.leaf_index) + " where " +
                             std::to_string(expected_leaf) + " was expected",
                         0);
      }
      ++expected_leaf;
    } else {
      inner_ids_.push_back(id);
    }
  }
  n_ = expected_leaf;
  for (int id = count - 1; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      node.first_leaf = node.leaf_index;
      node.subtree_end = id + 1;
    } else {
      int sum = 0;
      node.first_leaf = nodes_[static_cast<std::size_t>(node.first_child)].first_leaf;
      int last = node.first_child;
      for (int c = node.first_child; c >= 0; c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
        sum += nodes_[static_cast<std::size_t>(c)].leaf_count;
        last = c;
      }
      node.leaf_count = sum;
      node.subtree_end = nodes_[static_cast<std::size_t>(last)].subtree_end;
    }
  }
  int id = 0;
  spine_.push_back(0);
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
    int c = nodes_[static_cast<std::size_t>(id)].first_child;
    while (nodes_[static_cast<std::size_t>(c)].next_sibling >= 0) {
      c = nodes_[static_cast<std::size_t>(c)].next_sibling;
    }
    spine_.push_back(c);
    id = c;
  }
}

LpTree LpTree::parse(std::string_view text) {
  Parser parser(text);
  const Builder root = parser.run();
  std::vector<Node> nodes;
  flatten(root, -1, nodes);
  return LpTree(std::move(nodes));
}

LpTree LpTree::flat(int n, double p) {
  if (n < 1) throw std::invalid_argument("LpTree::flat: n must be >= 1");
  std::string text = "(" + format_exponent(std::clamp(p, kMinExponent, kMaxExponent));
  for (int i = 0; i < n; ++i) text += " " + std::to_string(i);
  text += ")";
  if (n == 1) return parse("0");
  return parse(text);
}

std::string LpTree::serialize() const {
  std::string out;
  auto rec = [&](auto&& self, int id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      out += std::to_string(node.leaf_index);
      return;
    }
    out += "(";
    out += format_exponent(node.p);
    for (int c = node.first_child; c >= 0; c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
      out += " ";
      self(self, c);
    }
    out += ")";
  };
  rec(rec, 0);
  return out;
}

int LpTree::inner_offset(int id) const {
  const auto it = std::lower_bound(inner_ids_.begin(), inner_ids_.end(), id);
  if (it == inner_ids_.end() || *it != id) {
    throw std::invalid_argument("inner_offset: node is not an inner node");
  }
  return static_cast<int>(it - inner_ids_.begin());
}

NodePath LpTree::path_of(int id) const {
  NodePath path;
  while (id != 0) {
    const int parent = nodes_[static_cast<std::size_t>(id)].parent;
    int index = 0;
    for (int c = nodes_[static_cast<std::size_t>(parent)].first_child; c != id;
         c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
      ++index;
    }
    path.push_back(index);
    id = parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int LpTree::id_of(const NodePath& path) const {
  int id = 0;
  for (const int step : path) {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf() || step < 0 || step >= node.child_count) {
      throw std::invalid_argument("id_of: path leaves the tree");
    }
    int c = node.first_child;
    for (int k = 0; k < step; ++k) c = nodes_[static_cast<std::size_t>(c)].next_sibling;
    id = c;
  }
  return id;
}

std::vector<int> LpTree::children(int id) const {
  std::vector<int> out;
  for (int c = nodes_[static_cast<std::size_t>(id)].first_child; c >= 0;
       c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
    out.push_back(c);
  }
  return out;
}

LpTree LpTree::with_exponents(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != inner_count()) {
    throw std::invalid_argument("with_exponents: wrong number of exponents");
  }
  std::vector<Node> nodes = nodes_;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0)) throw std::invalid_argument("with_exponents: exponent must be > 0");
    nodes[static_cast<std::size_t>(inner_ids_[k])].p = std::clamp(p[k], kMinExponent, kMaxExponent);
  }
  return LpTree(std::move(nodes));
}

std::vector<double> LpTree::exponents() const {
  std::vector<double> p;
  p.reserve(inner_ids_.size());
  for (const int id : inner_ids_) p.push_back(nodes_[static_cast<std::size_t>(id)].p);
  return p;
}

LpTree LpTree::simplified(double tol) const {
  if (tol < 0.0) throw std::invalid_argument("simplified: tol must be >= 0");
  Builder root = to_builder(*this, 0);
  splice_equal(root, tol);
  std::vector<Node> nodes;
  flatten(root, -1, nodes);
  return LpTree(std::move(nodes));
}

namespace {

// ||values||_p with rescaling by the largest entry, so large exponents do
// not overflow.
double lp_norm(const double* v, int count, double p) {
  double m = 0.0;
  for (int k = 0; k < count; ++k) m = std::max(m, v[k]);
  if (m == 0.0) return 0.0;
  if (p == 1.0) {
    double s = 0.0;
    for (int k = 0; k < count; ++k) s += v[k];
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (int k = 0; k < count; ++k) {
      const double t = v[k] / m;
      s += t * t;
    }
    return m * std::sqrt(s);
  }
  double s = 0.0;
  for (int k = 0; k < count; ++k) {
    const double t = v[k] / m;
    if (t > 0.0) s += std::pow(t, p);
  }
  return m * std::pow(s, 1.0 / p);
}

std::vector<double> node_values(const LpTree& tree, std::span<const double> x) {
  if (static_cast<int>(x.size()) != tree.dimension()) {
    throw std::invalid_argument("dimension mismatch: expected " +
                                std::to_string(tree.dimension()) + " coordinates, got " +
                                std::to_string(x.size()));
  }
  const int count = tree.node_count();
  std::vector<double> v(static_cast<std::size_t>(count));
  double scratch[64];
  std::vector<double> heap_scratch;
  for (int id = count - 1; id >= 0; --id) {
    const LpTree::Node& node = tree.node(id);
    ++instrument::node_visits;
    if (node.is_leaf()) {
      v[static_cast<std::size_t>(id)] = std::fabs(x[static_cast<std::size_t>(node.leaf_index)]);
      continue;
    }
    double* buf = scratch;
    if (node.child_count > 64) {
      heap_scratch.resize(static_cast<std::size_t>(node.child_count));
      buf = heap_scratch.data();
    }
    int k = 0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      buf[k++] = v[static_cast<std::size_t>(c)];
    }
    v[static_cast<std::size_t>(id)] = lp_norm(buf, k, node.p);
  }
  return v;
}

// For every node, the product of (v_child / v_parent)^(p_parent - 1) along
// the root-to-node path; zero whenever a zero value is crossed.
std::vector<double> path_factors(const LpTree& tree, const std::vector<double>& v) {
  const int count = tree.node_count();
  std::vector<double> factor(static_cast<std::size_t>(count), 0.0);
  factor[0] = 1.0;
  for (int id = 1; id < count; ++id) {
    ++instrument::node_visits;
    const LpTree::Node& node = tree.node(id);
    const int parent = node.parent;
    const double vp = v[static_cast<std::size_t>(parent)];
    const double vc = v[static_cast<std::size_t>(id)];
    if (vp <= 0.0 || vc <= 0.0 || factor[static_cast<std::size_t>(parent)] == 0.0) continue;
    const double pp = tree.node(parent).p;
    factor[static_cast<std::size_t>(id)] =
        factor[static_cast<std::size_t>(parent)] * std::pow(vc / vp, pp - 1.0);
  }
  return factor;
}

}  // namespace

double evaluate(const LpTree& tree, std::span<const double> x) {
  return node_values(tree, x)[0];
}

double evaluate_subtree(const LpTree& tree, int id, std::span<const double> x) {
  if (static_cast<int>(x.size()) != tree.dimension()) {
    throw std::invalid_argument("evaluate_subtree: dimension mismatch");
  }
  const LpTree::Node& top = tree.node(id);
  if (top.is_leaf()) return std::fabs(x[static_cast<std::size_t>(top.leaf_index)]);
  const int end = top.subtree_end;
  std::vector<double> v(static_cast<std::size_t>(end - id));
  double scratch[64];
  std::vector<double> heap_scratch;
  for (int k = end - 1; k >= id; --k) {
    ++instrument::node_visits;
    const LpTree::Node& node = tree.node(k);
    if (node.is_leaf()) {
      v[static_cast<std::size_t>(k - id)] = std::fabs(x[static_cast<std::size_t>(node.leaf_index)]);
      continue;
    }
    double* buf = scratch;
    if (node.child_count > 64) {
      heap_scratch.resize(static_cast<std::size_t>(node.child_count));
      buf = heap_scratch.data();
    }
    int cnum = 0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      buf[cnum++] = v[static_cast<std::size_t>(c - id)];
    }
    v[static_cast<std::size_t>(k - id)] = lp_norm(buf, cnum, node.p);
  }
  return v[0];
}

NodeValues evaluate_nodes(const LpTree& tree, std::span<const double> x) {
  return NodeValues(tree, node_values(tree, x));
}

std::vector<double> gradient_x(const LpTree& tree, std::span<const double> y) {
  const std::vector<double> v = node_values(tree, y);
  const std::vector<double> factor = path_factors(tree, v);
  std::vector<double> grad(y.size(), 0.0);
  for (int id = 0; id < tree.node_count(); ++id) {
    const LpTree::Node& node = tree.node(id);
    if (!node.is_leaf()) continue;
    const double yi = y[static_cast<std::size_t>(node.leaf_index)];
    const double sign = yi > 0.0 ? 1.0 : (yi < 0.0 ? -1.0 : 0.0);
    grad[static_cast<std::size_t>(node.leaf_index)] = factor[static_cast<std::size_t>(id)] * sign;
  }
  return grad;
}

std::vector<double> gradient_p(const LpTree& tree, std::span<const double> x) {
  const std::vector<double> v = node_values(tree, x);
  const std::vector<double> factor = path_factors(tree, v);
  std::vector<double> grad(static_cast<std::size_t>(tree.inner_count()), 0.0);
  for (int k = 0; k < tree.inner_count(); ++k) {
    const int id = tree.inner_ids()[static_cast<std::size_t>(k)];
    const LpTree::Node& node = tree.node(id);
    const double vj = v[static_cast<std::size_t>(id)];
    if (vj <= 0.0) continue;
    double local = 0.0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      ++instrument::node_visits;
      const double vc = v[static_cast<std::size_t>(c)];
      if (vc <= 0.0) continue;  // 0 * log 0 := 0
      const double ratio = vc / vj;
      local += std::pow(ratio, node.p) * std::log(ratio);
    }
    grad[static_cast<std::size_t>(k)] = factor[static_cast<std::size_t>(id)] * (vj / node.p) * local;
  }
  return grad;
}

}  // namespace lpnest
