#include "fastpd/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "fastpd/errors.hpp"

namespace fastpd {

using nlohmann::json;

int Tree::depth() const {
  // Iterative DFS; trees are shallow but this also guards against deep
  // degenerate chains without recursion.
  int max_depth = 0;
  std::vector<std::pair<int, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const Node& n = nodes.at(static_cast<std::size_t>(id));
    if (n.is_leaf()) {
      max_depth = std::max(max_depth, d);
    } else {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return max_depth;
}

int Tree::leaf_count() const {
  int count = 0;
  for (const Node& n : nodes)
    if (n.is_leaf()) ++count;
  return count;
}

FeatureSubset Tree::split_features() const {
  FeatureSubset f;
  // Collect along reachable nodes only; unreachable entries do not define
  // the function.
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const Node& n = nodes.at(static_cast<std::size_t>(stack.back()));
    stack.pop_back();
    if (!n.is_leaf()) {
      f.set(n.feature);
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return f;
}

int Tree::leaf_id_at(std::span<const double> x) const {
  int id = root;
  const Node* n = &nodes[static_cast<std::size_t>(id)];
  while (!n->is_leaf()) {
    id = x[static_cast<std::size_t>(n->feature)] < n->threshold ? n->left : n->right;
    n = &nodes[static_cast<std::size_t>(id)];
  }
  return id;
}

double Tree::leaf_value_at(std::span<const double> x) const {
  return nodes[static_cast<std::size_t>(leaf_id_at(x))].value;
}

void Tree::validate(int num_features) const {
  if (nodes.empty()) throw ValidationError("tree has no nodes");
  if (root < 0 || static_cast<std::size_t>(root) >= nodes.size())
    throw ValidationError("tree root id out of range");
  std::vector<int> parent_count(nodes.size(), 0);
  std::vector<char> visited(nodes.size(), 0);
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (visited[static_cast<std::size_t>(id)])
      throw ValidationError("node " + std::to_string(id) + " reached twice (cycle or shared child)");
    visited[static_cast<std::size_t>(id)] = 1;
    const Node& n = nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      if (n.left >= 0 || n.right >= 0)
        throw ValidationError("leaf node " + std::to_string(id) + " has children");
      continue;
    }
    if (n.feature >= num_features)
      throw ValidationError("node " + std::to_string(id) + " splits on feature " +
                            std::to_string(n.feature) + " >= num_features " +
                            std::to_string(num_features));
    if (!std::isfinite(n.threshold))
      throw ValidationError("node " + std::to_string(id) + " has non-finite threshold");
    for (int child : {n.left, n.right}) {
      if (child < 0 || static_cast<std::size_t>(child) >= nodes.size())
        throw ValidationError("node " + std::to_string(id) + " has missing or out-of-range child");
      ++parent_count[static_cast<std::size_t>(child)];
      stack.push_back(child);
    }
  }
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (static_cast<int>(id) == root) {
      if (parent_count[id] != 0)
        throw ValidationError("root node has a parent");
    } else if (visited[id] && parent_count[id] != 1) {
      throw ValidationError("node " + std::to_string(id) + " has " +
                            std::to_string(parent_count[id]) + " parents");
    }
  }
}

double TreeEnsemble::predict(std::span<const double> x) const {
  if (x.size() < static_cast<std::size_t>(num_features))
    throw ValidationError("predict: expected at least " + std::to_string(num_features) +
                          " coordinates, got " + std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw ValidationError("predict: non-finite coordinate at index " + std::to_string(i));
  double out = intercept;
  for (const Tree& t : trees) out += t.leaf_value_at(x);
  return out;
}

int TreeEnsemble::max_depth() const {
  int d = 0;
  for (const Tree& t : trees) d = std::max(d, t.depth());
  return d;
}

void TreeEnsemble::validate() const {
  for (const Tree& t : trees) t.validate(num_features);
}

TreeEnsemble TreeEnsemble::with_num_features(int d) const {
  if (d < num_features)
    throw ValidationError("cannot narrow num_features from " + std::to_string(num_features) +
                          " to " + std::to_string(d));
  TreeEnsemble out = *this;
  out.num_features = d;
  return out;
}

ModelFormat model_format_from_string(const std::string& name) {
  if (name == "xgboost-json" || name == "xgboost") return ModelFormat::kXgboostJson;
  if (name == "native-json" || name == "native") return ModelFormat::kNativeJson;
  throw ValidationError("unknown model format '" + name + "'");
}

namespace {

// --- xgboost booster dump -------------------------------------------------
//
// The dump is a JSON array with one nested node record per tree:
//   internal: {"nodeid", "split", "split_condition", "yes", "no", "missing"?, "children":[..]}
//   leaf:     {"nodeid", "leaf"}
// "split" is either "f<k>" or a bare feature index.

int parse_split_feature(const json& split, int nodeid) {
  if (split.is_number_integer()) return split.get<int>();
  if (split.is_string()) {
    const std::string s = split.get<std::string>();
    std::size_t pos = 0;
    const std::string digits = (!s.empty() && (s[0] == 'f' || s[0] == 'F')) ? s.substr(1) : s;
    try {
      const int idx = std::stoi(digits, &pos);
      if (pos == digits.size() && idx >= 0) return idx;
    } catch (const std::exception&) {
    }
    throw ParseError("node " + std::to_string(nodeid) + ": cannot map split field '" + s +
                     "' to a feature index (named features need an f<k> id)");
  }
  throw ParseError("node " + std::to_string(nodeid) + ": malformed split field");
}

void flatten_xgboost_node(const json& rec, std::unordered_map<int, Node>& by_id) {
  if (!rec.is_object() || !rec.contains("nodeid"))
    throw ParseError("malformed dump: node record without nodeid");
  const int nodeid = rec.at("nodeid").get<int>();
  if (by_id.count(nodeid))
    throw ParseError("node " + std::to_string(nodeid) + ": duplicate nodeid");

  Node node;
  if (rec.contains("leaf")) {
    if (!rec.at("leaf").is_number())
      throw ParseError("node " + std::to_string(nodeid) + ": non-numeric leaf value");
    node.value = rec.at("leaf").get<double>();
    by_id.emplace(nodeid, node);
    return;
  }

  if (!rec.contains("split") || !rec.contains("split_condition") || !rec.contains("children"))
    throw ParseError("node " + std::to_string(nodeid) + ": missing split fields");
  const json& cond = rec.at("split_condition");
  if (cond.is_array())
    throw ParseError("node " + std::to_string(nodeid) +
                     ": categorical split is not supported (only numeric threshold splits)");
  if (!cond.is_number())
    throw ParseError("node " + std::to_string(nodeid) + ": non-numeric split_condition");
  node.feature = parse_split_feature(rec.at("split"), nodeid);
  node.threshold = cond.get<double>();
  node.left = rec.at("yes").get<int>();
  node.right = rec.at("no").get<int>();
  if (rec.contains("missing")) {
    const int missing = rec.at("missing").get<int>();
    // The dump always names a default branch; it is unreachable for the
    // finite inputs this library accepts, as long as it aliases a real
    // child. A genuinely separate missing branch is unsupported.
    if (missing != node.left && missing != node.right)
      throw ParseError("node " + std::to_string(nodeid) +
                       ": missing-value default branch to a distinct node is not supported");
  }
  const json& children = rec.at("children");
  if (!children.is_array() || children.size() != 2)
    throw ParseError("node " + std::to_string(nodeid) + ": expected exactly two children");
  by_id.emplace(nodeid, node);
  for (const json& child : children) flatten_xgboost_node(child, by_id);
}

Tree parse_xgboost_tree(const json& rec) {
  std::unordered_map<int, Node> by_id;
  flatten_xgboost_node(rec, by_id);

  // Node ids are arbitrary; remap to a dense vector.
  std::vector<int> ids;
  ids.reserve(by_id.size());
  for (const auto& [id, node] : by_id) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  std::unordered_map<int, int> remap;
  for (std::size_t i = 0; i < ids.size(); ++i) remap[ids[i]] = static_cast<int>(i);

  Tree tree;
  tree.nodes.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Node n = by_id.at(ids[i]);
    if (!n.is_leaf()) {
      auto left = remap.find(n.left);
      auto right = remap.find(n.right);
      if (left == remap.end() || right == remap.end())
        throw ParseError("node " + std::to_string(ids[i]) + ": child id not present in tree");
      n.left = left->second;
      n.right = right->second;
    }
    tree.nodes[i] = n;
  }
  tree.root = remap.at(rec.at("nodeid").get<int>());
  return tree;
}

TreeEnsemble parse_xgboost(const json& doc, double base_score) {
  const json* trees = &doc;
  if (doc.is_object() && doc.size() == 1 && doc.begin()->is_array()) trees = &*doc.begin();
  if (!trees->is_array())
    throw ParseError("xgboost dump must be a JSON array of per-tree node records");

  TreeEnsemble ens;
  ens.intercept = base_score;
  for (const json& rec : *trees) ens.trees.push_back(parse_xgboost_tree(rec));

  int max_feature = -1;
  for (const Tree& t : ens.trees) max_feature = std::max(max_feature, t.split_features().max_feature());
  ens.num_features = max_feature + 1;
  ens.validate();
  return ens;
}

// --- native schema ---------------------------------------------------------

double json_double(const json& v, const char* what, int id) {
  if (!v.is_number())
    throw ParseError("node " + std::to_string(id) + ": non-numeric " + what);
  return v.get<double>();
}

TreeEnsemble parse_native(const json& doc) {
  if (!doc.is_object() || !doc.contains("num_features") || !doc.contains("trees"))
    throw ParseError("native model document must carry num_features and trees");
  TreeEnsemble ens;
  ens.num_features = doc.at("num_features").get<int>();
  ens.intercept = doc.value("intercept", 0.0);
  for (const json& jt : doc.at("trees")) {
    if (!jt.contains("nodes") || !jt.at("nodes").is_array() || jt.at("nodes").empty())
      throw ParseError("tree without nodes array");
    std::unordered_map<int, Node> by_id;
    std::vector<int> order;
    for (const json& jn : jt.at("nodes")) {
      const int id = jn.at("id").get<int>();
      if (by_id.count(id)) throw ParseError("node " + std::to_string(id) + ": duplicate id");
      Node n;
      const bool has_feature = jn.contains("feature") && !jn.at("feature").is_null();
      if (has_feature) {
        if (!jn.at("feature").is_number_integer())
          throw ParseError("node " + std::to_string(id) +
                           ": non-integer feature (categorical splits are not supported)");
        n.feature = jn.at("feature").get<int>();
        n.threshold = json_double(jn.at("threshold"), "threshold", id);
        if (jn.at("left").is_null() || jn.at("right").is_null())
          throw ParseError("node " + std::to_string(id) + ": internal node without both children");
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
      } else {
        n.value = json_double(jn.at("value"), "leaf value", id);
      }
      by_id.emplace(id, n);
      order.push_back(id);
    }
    std::sort(order.begin(), order.end());
    std::unordered_map<int, int> remap;
    for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<int>(i);
    Tree tree;
    tree.nodes.resize(order.size());
    std::vector<char> is_child(order.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      Node n = by_id.at(order[i]);
      if (!n.is_leaf()) {
        auto l = remap.find(n.left), r = remap.find(n.right);
        if (l == remap.end() || r == remap.end())
          throw ParseError("node " + std::to_string(order[i]) + ": child id not present in tree");
        n.left = l->second;
        n.right = r->second;
        is_child[static_cast<std::size_t>(n.left)] = 1;
        is_child[static_cast<std::size_t>(n.right)] = 1;
      }
      tree.nodes[i] = n;
    }
    int root = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (!is_child[i]) {
        if (root >= 0) throw ParseError("tree has more than one root");
        root = static_cast<int>(i);
      }
    }
    if (root < 0) throw ParseError("tree has no root (cycle)");
    tree.root = root;
    ens.trees.push_back(std::move(tree));
  }
  ens.validate();
  return ens;
}

}  // namespace

TreeEnsemble parse_model(const std::string& document, ModelFormat format, double base_score) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
  switch (format) {
    case ModelFormat::kXgboostJson:
      return parse_xgboost(doc, base_score);
    case ModelFormat::kNativeJson: {
      TreeEnsemble ens = parse_native(doc);
      if (doc.is_object() && !doc.contains("intercept")) ens.intercept = base_score;
      return ens;
    }
  }
  throw ValidationError("unreachable model format");
}

TreeEnsemble parse_model_file(const std::string& path, ModelFormat format, double base_score) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), format, base_score);
}

std::string serialize_native(const TreeEnsemble& ensemble) {
  json doc;
  doc["num_features"] = ensemble.num_features;
  doc["intercept"] = ensemble.intercept;
  doc["trees"] = json::array();
  for (const Tree& t : ensemble.trees) {
    json jt;
    jt["nodes"] = json::array();
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
      const Node& n = t.nodes[id];
      json jn;
      jn["id"] = static_cast<int>(id);
      if (n.is_leaf()) {
        jn["feature"] = nullptr;
        jn["threshold"] = nullptr;
        jn["left"] = nullptr;
        jn["right"] = nullptr;
        jn["value"] = n.value;
      } else {
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["value"] = nullptr;
      }
      jt["nodes"].push_back(std::move(jn));
    }
    doc["trees"].push_back(std::move(jt));
  }
  return doc.dump(2);
}

}  // namespace fastpd
