#include "sddete/persist.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sddete/errors.hpp"

namespace sddete {

namespace {

using Json = nlohmann::ordered_json;

Json read_json(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PersistenceError("cannot open: " + path.string());
  Json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad model file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw PersistenceError("bad model file " + path.string());
  return doc;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PersistenceError("cannot open for writing: " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) throw PersistenceError("write failed: " + path.string());
}

Json tree_params_to_json(const TreeParams& p) {
  Json j;
  j["max_depth"] = p.max_depth;
  j["max_bins"] = p.max_bins;
  j["min_info_gain"] = p.min_info_gain;
  j["min_instances_per_node"] = p.min_instances_per_node;
  return j;
}

TreeParams tree_params_from_json(const Json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.max_bins = j.at("max_bins").get<int>();
  p.min_info_gain = j.at("min_info_gain").get<double>();
  p.min_instances_per_node = j.at("min_instances_per_node").get<int>();
  return p;
}

void append_preorder(const TreeModel& model, int idx, Json& out) {
  const auto& node = model.nodes[static_cast<std::size_t>(idx)];
  Json j;
  if (node.is_leaf()) {
    j["type"] = "leaf";
    j["counts"] = node.counts;
  } else {
    j["type"] = "internal";
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["counts"] = node.counts;
  }
  out.push_back(std::move(j));
  if (!node.is_leaf()) {
    append_preorder(model, node.left, out);
    append_preorder(model, node.right, out);
  }
}

Json tree_to_json(const TreeModel& model) {
  Json j = tree_params_to_json(model.params);
  j["arity"] = model.arity;
  Json nodes = Json::array();
  if (!model.nodes.empty()) append_preorder(model, 0, nodes);
  j["nodes"] = std::move(nodes);
  return j;
}

int rebuild_subtree(const Json& nodes, std::size_t& cursor, std::size_t arity,
                    std::vector<TreeNode>& out) {
  if (cursor >= nodes.size()) throw PersistenceError("tree nodes truncated");
  const Json& j = nodes[cursor++];
  int my = static_cast<int>(out.size());
  out.emplace_back();
  std::string type = j.at("type").get<std::string>();
  auto counts = j.at("counts").get<std::array<std::size_t, 2>>();
  out[static_cast<std::size_t>(my)].counts = counts;
  if (type == "leaf") {
    if (counts[0] + counts[1] == 0) throw PersistenceError("leaf with no training counts");
    return my;
  }
  if (type != "internal") throw PersistenceError("unknown node type '" + type + "'");
  int feature = j.at("feature").get<int>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= arity)
    throw PersistenceError("node feature out of range");
  double threshold = j.at("threshold").get<double>();
  int left = rebuild_subtree(nodes, cursor, arity, out);
  int right = rebuild_subtree(nodes, cursor, arity, out);
  auto& node = out[static_cast<std::size_t>(my)];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return my;
}

TreeModel tree_from_json(const Json& j) {
  TreeModel model;
  model.params = tree_params_from_json(j);
  model.arity = j.at("arity").get<std::size_t>();
  const Json& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty())
    throw PersistenceError("tree has no nodes");
  std::size_t cursor = 0;
  rebuild_subtree(nodes, cursor, model.arity, model.nodes);
  if (cursor != nodes.size()) throw PersistenceError("trailing tree nodes");
  return model;
}

Json rd_to_json(const RdModel& m) {
  Json j;
  j["cuts"] = m.cuts;
  j["thresholds"] = m.thresholds;
  return j;
}

RdModel rd_from_json(const Json& j) {
  RdModel m;
  m.cuts = j.at("cuts").get<int>();
  m.thresholds = j.at("thresholds").get<std::vector<std::vector<double>>>();
  if (m.cuts < 2) throw PersistenceError("discretizer cuts out of range");
  for (const auto& t : m.thresholds) {
    if (t.size() != static_cast<std::size_t>(m.cuts - 1))
      throw PersistenceError("discretizer threshold count does not match cuts");
    if (!std::is_sorted(t.begin(), t.end()))
      throw PersistenceError("discretizer thresholds not sorted");
  }
  return m;
}

Json pca_to_json(const PcaModel& m) {
  Json j;
  j["mean"] = m.mean;
  j["components"] = m.components;
  j["explained_variance"] = m.explained_variance;
  return j;
}

PcaModel pca_from_json(const Json& j) {
  PcaModel m;
  m.mean = j.at("mean").get<std::vector<double>>();
  m.components = j.at("components").get<std::vector<std::vector<double>>>();
  m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  if (m.components.empty() || m.mean.empty())
    throw PersistenceError("projection model is empty");
  for (const auto& c : m.components)
    if (c.size() != m.mean.size())
      throw PersistenceError("projection component width does not match mean");
  if (m.explained_variance.size() != m.components.size())
    throw PersistenceError("projection variance count does not match components");
  return m;
}

}  // namespace

void save_model(const DeteModel& model, const std::filesystem::path& path) {
  Json doc;
  doc["format_version"] = model.format_version;
  doc["iter"] = model.iter;
  doc["num_classes"] = model.num_classes;
  Json iters = Json::array();
  for (const auto& it : model.iterations) {
    Json j;
    j["rd"] = rd_to_json(it.rd);
    j["pca"] = pca_to_json(it.pca);
    j["tree"] = tree_to_json(it.tree);
    iters.push_back(std::move(j));
  }
  doc["iterations"] = std::move(iters);
  write_text(doc.dump(), path);
}

DeteModel load_model(const std::filesystem::path& path) {
  Json doc = read_json(path);
  try {
    if (!doc.contains("format_version"))
      throw PersistenceError("model file " + path.string() + " has no format_version");
    if (doc.at("format_version").get<int>() != 1)
      throw PersistenceError("unsupported model format_version in " + path.string());
    DeteModel model;
    model.iter = doc.at("iter").get<int>();
    model.num_classes = doc.at("num_classes").get<int>();
    if (model.num_classes != 2)
      throw PersistenceError("model is not a binary classifier: " + path.string());
    const Json& iters = doc.at("iterations");
    if (!iters.is_array() || iters.empty() ||
        iters.size() != static_cast<std::size_t>(model.iter))
      throw PersistenceError("model iteration count mismatch in " + path.string());
    for (const Json& j : iters) {
      IterationModel it;
      it.rd = rd_from_json(j.at("rd"));
      it.pca = pca_from_json(j.at("pca"));
      it.tree = tree_from_json(j.at("tree"));
      if (it.rd.arity() != it.pca.arity())
        throw PersistenceError("iteration arity mismatch in " + path.string());
      if (it.tree.arity != it.rd.arity() + it.pca.k())
        throw PersistenceError("tree arity mismatch in " + path.string());
      model.iterations.push_back(std::move(it));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad model file " + path.string() + ": " + e.what());
  }
}

ModelKind peek_model_kind(const std::filesystem::path& path) {
  Json doc = read_json(path);
  if (doc.contains("iterations")) return ModelKind::sd_dete;
  try {
    std::string kind = doc.at("model_type").get<std::string>();
    if (kind == "decision_tree") return ModelKind::decision_tree;
    if (kind == "random_forest") return ModelKind::random_forest;
    throw PersistenceError("unknown model_type '" + kind + "' in " + path.string());
  } catch (const nlohmann::json::exception&) {
    throw PersistenceError("cannot tell what kind of model " + path.string() + " holds");
  }
}

void save_tree_model(const TreeModel& model, const std::filesystem::path& path) {
  Json doc;
  doc["format_version"] = 1;
  doc["model_type"] = "decision_tree";
  doc["tree"] = tree_to_json(model);
  write_text(doc.dump(), path);
}

TreeModel load_tree_model(const std::filesystem::path& path) {
  Json doc = read_json(path);
  try {
    if (doc.at("format_version").get<int>() != 1)
      throw PersistenceError("unsupported model format_version in " + path.string());
    if (doc.at("model_type").get<std::string>() != "decision_tree")
      throw PersistenceError(path.string() + " does not hold a decision tree");
    return tree_from_json(doc.at("tree"));
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad model file " + path.string() + ": " + e.what());
  }
}

void save_forest_model(const ForestModel& model, const std::filesystem::path& path) {
  Json doc;
  doc["format_version"] = 1;
  doc["model_type"] = "random_forest";
  doc["n_trees"] = model.params.n_trees;
  doc["bootstrap"] = model.params.bootstrap;
  doc["feature_subsampling"] = model.params.feature_subsampling;
  doc["arity"] = model.arity;
  Json trees = Json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  doc["trees"] = std::move(trees);
  write_text(doc.dump(), path);
}

ForestModel load_forest_model(const std::filesystem::path& path) {
  Json doc = read_json(path);
  try {
    if (doc.at("format_version").get<int>() != 1)
      throw PersistenceError("unsupported model format_version in " + path.string());
    if (doc.at("model_type").get<std::string>() != "random_forest")
      throw PersistenceError(path.string() + " does not hold a random forest");
    ForestModel model;
    model.params.n_trees = doc.at("n_trees").get<int>();
    model.params.bootstrap = doc.at("bootstrap").get<bool>();
    model.params.feature_subsampling = doc.at("feature_subsampling").get<bool>();
    model.arity = doc.at("arity").get<std::size_t>();
    const Json& trees = doc.at("trees");
    if (!trees.is_array() || trees.empty() ||
        trees.size() != static_cast<std::size_t>(model.params.n_trees))
      throw PersistenceError("forest tree count mismatch in " + path.string());
    for (const Json& t : trees) {
      model.trees.push_back(tree_from_json(t));
      if (model.trees.back().arity != model.arity)
        throw PersistenceError("forest tree arity mismatch in " + path.string());
    }
    model.params.tree = model.trees[0].params;
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("bad model file " + path.string() + ": " + e.what());
  }
}

}  // namespace sddete
