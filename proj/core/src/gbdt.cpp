#include "riskstream/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

using json = nlohmann::json;

namespace {

constexpr const char* kOtherCategory = "__other__";
constexpr double kMaxLeafValue = 4.0;
constexpr double kProbabilityClip = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logloss(std::span<const int> labels, std::span<const double> probs) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probs[i], kProbabilityClip, 1.0 - kProbabilityClip);
    total += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(labels.size());
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void Hyperparams::validate() const {
  if (num_trees < 1) throw ConfigError("model.num_trees must be >= 1");
  if (max_depth < 1) throw ConfigError("model.max_depth must be >= 1");
  if (!(learning_rate > 0.0) || learning_rate > 1.0) {
    throw ConfigError("model.learning_rate must be in (0, 1]");
  }
  if (min_leaf_count < 1) throw ConfigError("model.min_leaf_count must be >= 1");
  if (max_categories < 2) throw ConfigError("model.max_categories must be >= 2");
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::static_only ? "static" : "dynamic";
}

ModelMode parse_model_mode(const std::string& text) {
  if (text == "static") return ModelMode::static_only;
  if (text == "dynamic") return ModelMode::dynamic;
  throw DataError("unknown model mode: " + text);
}

FeatureEncoder FeatureEncoder::fit(const AssembledDataset& dataset, ModelMode mode,
                                   int max_categories) {
  FeatureEncoder encoder;
  encoder.mode_ = mode;
  if (mode == ModelMode::dynamic) encoder.dynamic_names_ = dataset.dynamic_names;

  for (const auto& name : dataset.static_names) {
    bool numeric = true;
    std::map<std::string, std::int64_t> tokens;
    for (const auto& row : dataset.rows) {
      auto it = row.static_features.find(name);
      if (it == row.static_features.end()) {
        tokens[kMissingFeatureToken] += 1;
        numeric = false;
        continue;
      }
      if (std::holds_alternative<std::string>(it->second)) numeric = false;
      tokens[feature_token(it->second)] += 1;
    }

    StaticFeature feature;
    feature.name = name;
    feature.numeric = numeric;
    if (!numeric) {
      if (std::cmp_less_equal(tokens.size(), max_categories)) {
        for (const auto& [token, n] : tokens) feature.categories.push_back(token);
      } else {
        // Keep the most frequent values, pool the tail into __other__.
        std::vector<std::pair<std::string, std::int64_t>> by_count(tokens.begin(), tokens.end());
        std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
          return std::tie(b.second, a.first) < std::tie(a.second, b.first);
        });
        by_count.resize(static_cast<std::size_t>(max_categories) - 1);
        for (auto& [token, n] : by_count) feature.categories.push_back(std::move(token));
        std::sort(feature.categories.begin(), feature.categories.end());
        feature.categories.push_back(kOtherCategory);
      }
    }
    encoder.static_.push_back(std::move(feature));
  }
  return encoder;
}

FeatureEncoder FeatureEncoder::from_parts(ModelMode mode, std::vector<StaticFeature> statics,
                                          std::vector<std::string> dynamics) {
  FeatureEncoder encoder;
  encoder.mode_ = mode;
  encoder.static_ = std::move(statics);
  encoder.dynamic_names_ = std::move(dynamics);
  return encoder;
}

std::vector<std::string> FeatureEncoder::column_names() const {
  std::vector<std::string> names;
  names.reserve(column_count());
  for (const auto& feature : static_) {
    if (feature.numeric) {
      names.push_back(feature.name);
    } else {
      for (const auto& category : feature.categories) {
        names.push_back(feature.name + "=" + category);
      }
    }
  }
  for (const auto& name : dynamic_names_) names.push_back(name);
  return names;
}

std::size_t FeatureEncoder::column_count() const {
  std::size_t count = dynamic_names_.size();
  for (const auto& feature : static_) {
    count += feature.numeric ? 1 : feature.categories.size();
  }
  return count;
}

std::vector<double> FeatureEncoder::encode(const AssembledRow& row) const {
  std::vector<double> out(column_count(), 0.0);
  std::size_t col = 0;
  std::vector<std::string> missing;

  for (const auto& feature : static_) {
    auto it = row.static_features.find(feature.name);
    if (feature.numeric) {
      if (it == row.static_features.end() || !std::holds_alternative<double>(it->second)) {
        missing.push_back(feature.name);
      } else {
        out[col] = std::get<double>(it->second);
      }
      ++col;
      continue;
    }
    const std::string token =
        it == row.static_features.end() ? kMissingFeatureToken : feature_token(it->second);
    auto cat = std::lower_bound(feature.categories.begin(), feature.categories.end(), token);
    std::size_t offset;
    if (cat != feature.categories.end() && *cat == token) {
      offset = static_cast<std::size_t>(cat - feature.categories.begin());
      out[col + offset] = 1.0;
    } else if (!feature.categories.empty() && feature.categories.back() == kOtherCategory) {
      out[col + feature.categories.size() - 1] = 1.0;
    }
    // Unseen value without an __other__ pool encodes as all-zeros.
    col += feature.categories.size();
  }

  if (mode_ == ModelMode::dynamic) {
    if (row.dynamic_features.size() != dynamic_names_.size()) {
      std::string detail = "schema mismatch: expected " +
                           std::to_string(dynamic_names_.size()) + " dynamic columns (";
      for (std::size_t i = 0; i < dynamic_names_.size(); ++i) {
        if (i) detail += ", ";
        detail += dynamic_names_[i];
      }
      detail += "), row has " + std::to_string(row.dynamic_features.size());
      throw DataError(detail);
    }
    for (double v : row.dynamic_features) out[col++] = v;
  }

  if (!missing.empty()) {
    std::string detail = "schema mismatch: missing columns";
    for (const auto& name : missing) detail += " " + name;
    throw DataError(detail);
  }
  return out;
}

TrainingView make_training_view(const AssembledDataset& dataset, ModelMode mode,
                                const SplitSpec& split, int max_categories) {
  if (!(split.train_fraction > 0.0) || !(split.train_fraction < 1.0)) {
    throw ConfigError("evaluation.train_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    if (!dataset.rows[i].warm_up) eligible.push_back(i);
  }
  if (eligible.empty()) throw DataError("empty dataset");

  if (split.mode == SplitSpec::Mode::random) {
    Rng rng(split.seed);
    for (std::size_t i = eligible.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
      std::swap(eligible[i], eligible[j]);
    }
  } else {
    std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(dataset.rows[a].time.seconds, dataset.rows[a].id) <
             std::tie(dataset.rows[b].time.seconds, dataset.rows[b].id);
    });
  }

  const auto n_train = static_cast<std::size_t>(
      std::llround(split.train_fraction * static_cast<double>(eligible.size())));
  if (n_train == 0 || n_train == eligible.size()) {
    throw DataError("split leaves an empty train or test set");
  }

  TrainingView view;
  view.encoder = FeatureEncoder::fit(dataset, mode, max_categories);
  view.train = encode_rows(dataset, view.encoder,
                           std::span<const std::size_t>(eligible.data(), n_train));
  view.test = encode_rows(dataset, view.encoder,
                          std::span<const std::size_t>(eligible.data() + n_train,
                                                       eligible.size() - n_train));
  return view;
}

DesignMatrix encode_rows(const AssembledDataset& dataset, const FeatureEncoder& encoder,
                         std::span<const std::size_t> row_indices) {
  DesignMatrix matrix;
  matrix.columns = encoder.column_names();
  matrix.values.assign(matrix.columns.size(), {});
  for (auto& column : matrix.values) column.reserve(row_indices.size());
  matrix.labels.reserve(row_indices.size());
  matrix.ids.reserve(row_indices.size());
  matrix.times.reserve(row_indices.size());

  for (std::size_t index : row_indices) {
    const AssembledRow& row = dataset.rows.at(index);
    const std::vector<double> x = encoder.encode(row);
    for (std::size_t c = 0; c < x.size(); ++c) matrix.values[c].push_back(x[c]);
    matrix.labels.push_back(row.final_label == Verdict::fraud ? 1 : 0);
    matrix.ids.push_back(row.id);
    matrix.times.push_back(row.time);
  }
  return matrix;
}

double RegressionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct BuildNode {
  std::int64_t count{0};
  double sum_g{0.0};
  double sum_h{0.0};
  bool active{false};
  // chosen split
  int feature{-1};
  double threshold{0.0};
  double gain{0.0};
  int left{-1};
  int right{-1};
  double leaf{0.0};
};

// One boosting round: a depth-limited regression tree fit to the gradient
// with variance-gain splits and Newton leaf values.
RegressionTree build_tree(const DesignMatrix& data,
                          const std::vector<std::vector<std::int32_t>>& order,
                          std::span<const double> grad, std::span<const double> hess,
                          const Hyperparams& params, std::vector<std::int32_t>& node_of_row) {
  const std::size_t n = data.rows();
  const std::size_t n_features = data.values.size();

  std::vector<BuildNode> nodes(1);
  nodes[0].count = static_cast<std::int64_t>(n);
  nodes[0].sum_g = std::accumulate(grad.begin(), grad.end(), 0.0);
  nodes[0].sum_h = std::accumulate(hess.begin(), hess.end(), 0.0);
  nodes[0].active = true;
  std::fill(node_of_row.begin(), node_of_row.end(), 0);

  std::vector<int> frontier{0};

  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    // Per-frontier-node running state while scanning one sorted feature.
    std::vector<std::int64_t> left_count(nodes.size());
    std::vector<double> left_sum(nodes.size());
    std::vector<double> last_value(nodes.size());

    for (std::size_t f = 0; f < n_features; ++f) {
      for (int id : frontier) {
        left_count[static_cast<std::size_t>(id)] = 0;
        left_sum[static_cast<std::size_t>(id)] = 0.0;
      }
      const std::vector<double>& column = data.values[f];
      for (std::int32_t row : order[f]) {
        const auto node_id = static_cast<std::size_t>(node_of_row[static_cast<std::size_t>(row)]);
        BuildNode& node = nodes[node_id];
        if (!node.active) continue;
        const double v = column[static_cast<std::size_t>(row)];
        const std::int64_t nl = left_count[node_id];
        if (nl > 0 && v > last_value[node_id]) {
          const std::int64_t nr = node.count - nl;
          if (nl >= params.min_leaf_count && nr >= params.min_leaf_count) {
            const double sl = left_sum[node_id];
            const double sr = node.sum_g - sl;
            const double gain = sl * sl / static_cast<double>(nl) +
                                sr * sr / static_cast<double>(nr) -
                                node.sum_g * node.sum_g / static_cast<double>(node.count);
            if (gain > node.gain) {
              node.gain = gain;
              node.feature = static_cast<int>(f);
              node.threshold = 0.5 * (last_value[node_id] + v);
            }
          }
        }
        left_count[node_id] += 1;
        left_sum[node_id] += grad[static_cast<std::size_t>(row)];
        last_value[node_id] = v;
      }
    }

    // Materialize children for nodes that found a positive-gain split.
    std::vector<int> next_frontier;
    for (int id : frontier) {
      BuildNode& node = nodes[static_cast<std::size_t>(id)];
      if (node.feature < 0) {
        node.active = false;
        continue;
      }
      node.left = static_cast<int>(nodes.size());
      node.right = static_cast<int>(nodes.size() + 1);
      nodes.emplace_back();
      nodes.emplace_back();
      nodes[static_cast<std::size_t>(node.left)].active = true;
      nodes[static_cast<std::size_t>(node.right)].active = true;
      next_frontier.push_back(node.left);
      next_frontier.push_back(node.right);
    }

    if (!next_frontier.empty()) {
      for (std::size_t row = 0; row < n; ++row) {
        auto& assigned = node_of_row[row];
        const BuildNode& node = nodes[static_cast<std::size_t>(assigned)];
        if (node.feature < 0 || node.left < 0) continue;
        const double v = data.values[static_cast<std::size_t>(node.feature)][row];
        assigned = v < node.threshold ? node.left : node.right;
        BuildNode& child = nodes[static_cast<std::size_t>(assigned)];
        child.count += 1;
        child.sum_g += grad[row];
        child.sum_h += hess[row];
      }
    }
    frontier = std::move(next_frontier);
  }

  for (BuildNode& node : nodes) {
    if (node.feature >= 0 && node.left >= 0) continue;
    node.active = false;
    node.leaf = node.sum_h > 0.0
                    ? std::clamp(node.sum_g / node.sum_h, -kMaxLeafValue, kMaxLeafValue)
                    : 0.0;
  }

  RegressionTree tree;
  tree.nodes.reserve(nodes.size());
  for (const BuildNode& node : nodes) {
    TreeNode out;
    if (node.feature >= 0 && node.left >= 0) {
      out.feature = node.feature;
      out.threshold = node.threshold;
      out.left = node.left;
      out.right = node.right;
    } else {
      out.value = node.leaf;
    }
    tree.nodes.push_back(out);
  }
  return tree;
}

}  // namespace

TrainedModel train(const DesignMatrix& train_set, const FeatureEncoder& encoder,
                   const Hyperparams& params) {
  params.validate();
  const std::size_t n = train_set.rows();
  if (n == 0) throw DataError("empty dataset");
  const auto positives = static_cast<std::size_t>(
      std::count(train_set.labels.begin(), train_set.labels.end(), 1));
  if (positives == 0 || positives == n) throw DataError("degenerate labels");
  if (train_set.values.size() != encoder.column_count()) {
    throw InternalError("design matrix does not match encoder schema");
  }

  TrainedModel model;
  model.mode = encoder.mode();
  model.params = params;
  model.encoder = encoder;

  const double prior = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  // Pre-sorted feature orders, computed once and shared by all rounds.
  std::vector<std::vector<std::int32_t>> order(train_set.values.size());
  for (std::size_t f = 0; f < train_set.values.size(); ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0);
    const auto& column = train_set.values[f];
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::int32_t a, std::int32_t b) {
      return column[static_cast<std::size_t>(a)] < column[static_cast<std::size_t>(b)];
    });
  }

  std::vector<double> raw(n, model.base_score);
  std::vector<double> prob(n), grad(n), hess(n);
  std::vector<std::int32_t> node_of_row(n);
  model.trees.reserve(static_cast<std::size_t>(params.num_trees));
  model.round_train_loss.reserve(static_cast<std::size_t>(params.num_trees));

  for (int round = 0; round < params.num_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(raw[i]);
      grad[i] = static_cast<double>(train_set.labels[i]) - prob[i];
      hess[i] = prob[i] * (1.0 - prob[i]);
    }
    RegressionTree tree = build_tree(train_set, order, grad, hess, params, node_of_row);
    for (std::size_t i = 0; i < n; ++i) {
      raw[i] += params.learning_rate *
                tree.nodes[static_cast<std::size_t>(node_of_row[i])].value;
    }
    model.trees.push_back(std::move(tree));
    for (std::size_t i = 0; i < n; ++i) prob[i] = sigmoid(raw[i]);
    model.round_train_loss.push_back(logloss(train_set.labels, prob));
  }
  return model;
}

std::string TrainedModel::schema_hash() const {
  std::string text = to_string(mode);
  for (const auto& name : encoder.column_names()) {
    text += '\n';
    text += name;
  }
  return fnv1a_hex(text);
}

double TrainedModel::score_encoded(std::span<const double> x) const {
  double raw = base_score;
  for (const auto& tree : trees) raw += params.learning_rate * tree.predict(x);
  return sigmoid(raw);
}

double TrainedModel::score(const AssembledRow& row) const {
  const std::vector<double> x = encoder.encode(row);
  return score_encoded(x);
}

int display_score(double probability) {
  return static_cast<int>(std::llround(probability * 100.0));
}

namespace {

json tree_to_json(const RegressionTree& tree, const std::vector<std::string>& columns,
                  int index) {
  const TreeNode& node = tree.nodes.at(static_cast<std::size_t>(index));
  if (node.is_leaf()) return json{{"value", node.value}};
  return json{{"feature", columns.at(static_cast<std::size_t>(node.feature))},
              {"threshold", node.threshold},
              {"left", tree_to_json(tree, columns, node.left)},
              {"right", tree_to_json(tree, columns, node.right)}};
}

int tree_from_json(const json& obj, const std::map<std::string, int>& column_index,
                   RegressionTree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (obj.contains("value")) {
    tree.nodes[static_cast<std::size_t>(index)].value = obj.at("value").get<double>();
    return index;
  }
  const std::string feature = obj.at("feature").get<std::string>();
  auto it = column_index.find(feature);
  if (it == column_index.end()) throw DataError("model references unknown column " + feature);
  const double threshold = obj.at("threshold").get<double>();
  const int left = tree_from_json(obj.at("left"), column_index, tree);
  const int right = tree_from_json(obj.at("right"), column_index, tree);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = it->second;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return index;
}

}  // namespace

std::string TrainedModel::to_json() const {
  json encoder_static = json::array();
  for (const auto& feature : encoder.static_features()) {
    encoder_static.push_back({{"name", feature.name},
                              {"kind", feature.numeric ? "numeric" : "categorical"},
                              {"categories", feature.categories}});
  }
  json trees_json = json::array();
  const std::vector<std::string> columns = encoder.column_names();
  for (const auto& tree : trees) trees_json.push_back(tree_to_json(tree, columns, 0));

  json obj{{"format_version", 1},
           {"model", "gbdt-logistic"},
           {"mode", to_string(mode)},
           {"schema_hash", schema_hash()},
           {"base_score", base_score},
           {"hyperparams",
            {{"num_trees", params.num_trees},
             {"max_depth", params.max_depth},
             {"learning_rate", params.learning_rate},
             {"min_leaf_count", params.min_leaf_count},
             {"seed", params.seed},
             {"max_categories", params.max_categories}}},
           {"encoder", {{"static", encoder_static}, {"dynamic", encoder.dynamic_names()}}},
           {"trees", trees_json}};
  return obj.dump(2);
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded()) throw DataError("bad model JSON");
  try {
    if (obj.at("format_version").get<int>() != 1) throw DataError("unsupported model version");

    TrainedModel model;
    model.mode = parse_model_mode(obj.at("mode").get<std::string>());
    const json& hp = obj.at("hyperparams");
    model.params.num_trees = hp.at("num_trees").get<int>();
    model.params.max_depth = hp.at("max_depth").get<int>();
    model.params.learning_rate = hp.at("learning_rate").get<double>();
    model.params.min_leaf_count = hp.at("min_leaf_count").get<int>();
    model.params.seed = hp.at("seed").get<std::uint64_t>();
    model.params.max_categories = hp.at("max_categories").get<int>();
    model.base_score = obj.at("base_score").get<double>();

    std::vector<FeatureEncoder::StaticFeature> statics;
    for (const auto& item : obj.at("encoder").at("static")) {
      FeatureEncoder::StaticFeature feature;
      feature.name = item.at("name").get<std::string>();
      feature.numeric = item.at("kind").get<std::string>() == "numeric";
      feature.categories = item.at("categories").get<std::vector<std::string>>();
      statics.push_back(std::move(feature));
    }
    model.encoder = FeatureEncoder::from_parts(
        model.mode, std::move(statics),
        obj.at("encoder").at("dynamic").get<std::vector<std::string>>());

    std::map<std::string, int> column_index;
    int next = 0;
    for (const auto& name : model.encoder.column_names()) column_index[name] = next++;

    for (const auto& tree_json : obj.at("trees")) {
      RegressionTree tree;
      tree_from_json(tree_json, column_index, tree);
      model.trees.push_back(std::move(tree));
    }

    if (model.schema_hash() != obj.at("schema_hash").get<std::string>()) {
      throw DataError("model schema hash mismatch");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json() << '\n';
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace riskstream
