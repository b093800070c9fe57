#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskstream {

struct RocPoint {
  double threshold{0.0};
  double fpr{0.0};
  double tpr{0.0};
};

// Operating points over all distinct score thresholds ("positive if score >=
// threshold"), anchored at exactly (0,0) and (1,1). The AUC is the
// probability that a random positive outscores a random negative, ties
// counted half; the trapezoid over the tie-grouped curve computes exactly
// that quantity.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc{0.0};
};

// Throws DataError when labels are single-class.
RocCurve roc(std::span<const double> scores, std::span<const int> labels);

// Linear interpolation between adjacent curve points. Anchors must lie in
// (0, 1).
double tpr_at_fpr(const RocCurve& curve, double fpr_target);
double fpr_at_tpr(const RocCurve& curve, double tpr_target);

// Relative lifts of the dynamic model over the static one, in the anchored
// style: TPR gain at a fixed FPR and FPR reduction at a fixed TPR. A lift is
// absent (not an error) when its denominator is zero at the anchor.
struct LiftReport {
  double fpr_anchor{0.0};
  double tpr_anchor{0.0};
  double auc_static{0.0};
  double auc_dynamic{0.0};
  double tpr_static_at_anchor{0.0};
  double tpr_dynamic_at_anchor{0.0};
  double fpr_static_at_anchor{0.0};
  double fpr_dynamic_at_anchor{0.0};
  std::optional<double> tpr_lift_at_fpr;       // (TPR_dyn - TPR_stat) / TPR_stat
  std::optional<double> fpr_reduction_at_tpr;  // (FPR_stat - FPR_dyn) / FPR_stat
};

LiftReport compare_models(std::span<const double> scores_static,
                          std::span<const double> scores_dynamic,
                          std::span<const int> labels, double fpr_anchor,
                          double tpr_anchor);

struct ScoredSlice {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct ModelSlices {
  std::string name;
  ScoredSlice in_time;
  ScoredSlice offline;
};

struct DegradationEntry {
  std::string model;
  double auc_in_time{0.0};
  double auc_offline{0.0};
  double drop{0.0};  // in-time minus offline
};

struct DegradationReport {
  std::vector<DegradationEntry> entries;
};

// AUC per (model, slice) and the in-time-minus-offline drop per model.
// Throws DataError on an empty slice.
DegradationReport degradation_study(std::span<const ModelSlices> models);

// CSV rows `threshold,fpr,tpr`.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

}  // namespace riskstream
