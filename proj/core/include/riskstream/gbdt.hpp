#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskstream/feature_frame.hpp"

namespace riskstream {

struct Hyperparams {
  int num_trees{100};
  int max_depth{3};
  double learning_rate{0.1};
  int min_leaf_count{20};
  std::uint64_t seed{0};
  int max_categories{64};  // one-hot cutoff; rarer values pool into __other__

  void validate() const;
};

// Which feature block the model consumes: the raw static vector x, or the
// assembled vector (x, f_t) with the dynamic risk features attached.
enum class ModelMode { static_only, dynamic };

std::string to_string(ModelMode mode);
ModelMode parse_model_mode(const std::string& text);

struct SplitSpec {
  enum class Mode { random, temporal };
  Mode mode{Mode::random};
  double train_fraction{0.7};
  std::uint64_t seed{0};
};

// Maps assembled rows onto a fixed numeric design: numeric features pass
// through, categorical features one-hot over the fitted category list,
// dynamic features appended as-is (dynamic mode only). The encoder is part
// of the model and is what makes schema mismatches detectable.
class FeatureEncoder {
 public:
  struct StaticFeature {
    std::string name;
    bool numeric{false};
    std::vector<std::string> categories;  // empty when numeric
  };

  static FeatureEncoder fit(const AssembledDataset& dataset, ModelMode mode,
                            int max_categories);

  ModelMode mode() const { return mode_; }
  const std::vector<StaticFeature>& static_features() const { return static_; }
  const std::vector<std::string>& dynamic_names() const { return dynamic_names_; }

  std::vector<std::string> column_names() const;
  std::size_t column_count() const;

  // Throws DataError naming the missing or extra columns.
  std::vector<double> encode(const AssembledRow& row) const;

  static FeatureEncoder from_parts(ModelMode mode, std::vector<StaticFeature> statics,
                                   std::vector<std::string> dynamics);

 private:
  ModelMode mode_{ModelMode::static_only};
  std::vector<StaticFeature> static_;
  std::vector<std::string> dynamic_names_;
};

struct DesignMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // column-major [column][row]
  std::vector<int> labels;                  // 1 = fraud
  std::vector<std::int64_t> ids;
  std::vector<Timestamp> times;

  std::size_t rows() const { return labels.size(); }
};

struct TrainingView {
  FeatureEncoder encoder;
  DesignMatrix train;
  DesignMatrix test;
};

// 70/30 materialization of the assembled dataset for one model mode. Warm-up
// rows are excluded. Random mode shuffles with the split seed; temporal mode
// takes the earliest fraction as training. Throws DataError on an empty
// dataset.
TrainingView make_training_view(const AssembledDataset& dataset, ModelMode mode,
                                const SplitSpec& split, int max_categories = 64);

DesignMatrix encode_rows(const AssembledDataset& dataset, const FeatureEncoder& encoder,
                         std::span<const std::size_t> row_indices);

struct TreeNode {
  int feature{-1};  // -1 marks a leaf
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0};

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
};

// Gradient-boosted trees on logistic loss. Rows with feature < threshold go
// left; thresholds sit midway between adjacent distinct sorted values; ties
// in split gain resolve to the lowest feature index, then lowest threshold.
// Training is single-threaded and bit-deterministic.
class TrainedModel {
 public:
  ModelMode mode{ModelMode::static_only};
  Hyperparams params;
  FeatureEncoder encoder;
  double base_score{0.0};  // log-odds of the training prior
  std::vector<RegressionTree> trees;
  std::vector<double> round_train_loss;  // per-round training logloss, not serialized

  std::string schema_hash() const;
  double score(const AssembledRow& row) const;  // probability in [0,1]
  double score_encoded(std::span<const double> x) const;

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);
};

// 0-100 display scale used by review tooling.
int display_score(double probability);

// Boosted training. Throws DataError("degenerate labels") when the training
// set has a single class.
TrainedModel train(const DesignMatrix& train_set, const FeatureEncoder& encoder,
                   const Hyperparams& params);

}  // namespace riskstream
