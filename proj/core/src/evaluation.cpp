#include "riskstream/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>

#include "riskstream/errors.hpp"

namespace riskstream {

RocCurve roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  const std::int64_t positives = std::count(labels.begin(), labels.end(), 1);
  const std::int64_t negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw DataError("labels are single-class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // Consume the whole tie group at this threshold.
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] == 1) ++tp;
      else ++fp;
      ++i;
    }
    curve.points.push_back({threshold,
                            static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  curve.auc = auc;
  return curve;
}

double tpr_at_fpr(const RocCurve& curve, double fpr_target) {
  if (!(fpr_target > 0.0) || !(fpr_target < 1.0)) {
    throw ConfigError("evaluation.fpr_anchor must be in (0, 1)");
  }
  const auto& points = curve.points;
  std::size_t i = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].fpr <= fpr_target) i = k;
    else break;
  }
  if (points[i].fpr == fpr_target) return points[i].tpr;
  const auto& a = points[i];
  const auto& b = points[i + 1];
  const double t = (fpr_target - a.fpr) / (b.fpr - a.fpr);
  return a.tpr + t * (b.tpr - a.tpr);
}

double fpr_at_tpr(const RocCurve& curve, double tpr_target) {
  if (!(tpr_target > 0.0) || !(tpr_target < 1.0)) {
    throw ConfigError("evaluation.tpr_anchor must be in (0, 1)");
  }
  const auto& points = curve.points;
  std::size_t j = 0;
  while (j < points.size() && points[j].tpr < tpr_target) ++j;
  if (points[j].tpr == tpr_target) return points[j].fpr;
  const auto& a = points[j - 1];
  const auto& b = points[j];
  const double u = (tpr_target - a.tpr) / (b.tpr - a.tpr);
  return a.fpr + u * (b.fpr - a.fpr);
}

LiftReport compare_models(std::span<const double> scores_static,
                          std::span<const double> scores_dynamic,
                          std::span<const int> labels, double fpr_anchor,
                          double tpr_anchor) {
  if (scores_static.size() != scores_dynamic.size()) {
    throw DataError("models must be scored on identical rows");
  }
  const RocCurve curve_static = roc(scores_static, labels);
  const RocCurve curve_dynamic = roc(scores_dynamic, labels);

  LiftReport report;
  report.fpr_anchor = fpr_anchor;
  report.tpr_anchor = tpr_anchor;
  report.auc_static = curve_static.auc;
  report.auc_dynamic = curve_dynamic.auc;

  report.tpr_static_at_anchor = tpr_at_fpr(curve_static, fpr_anchor);
  report.tpr_dynamic_at_anchor = tpr_at_fpr(curve_dynamic, fpr_anchor);
  if (report.tpr_static_at_anchor > 0.0) {
    report.tpr_lift_at_fpr = (report.tpr_dynamic_at_anchor - report.tpr_static_at_anchor) /
                             report.tpr_static_at_anchor;
  }

  report.fpr_static_at_anchor = fpr_at_tpr(curve_static, tpr_anchor);
  report.fpr_dynamic_at_anchor = fpr_at_tpr(curve_dynamic, tpr_anchor);
  if (report.fpr_static_at_anchor > 0.0) {
    report.fpr_reduction_at_tpr = (report.fpr_static_at_anchor - report.fpr_dynamic_at_anchor) /
                                  report.fpr_static_at_anchor;
  }
  return report;
}

DegradationReport degradation_study(std::span<const ModelSlices> models) {
  DegradationReport report;
  for (const auto& model : models) {
    if (model.in_time.scores.empty() || model.offline.scores.empty()) {
      throw DataError("empty slice for model " + model.name);
    }
    DegradationEntry entry;
    entry.model = model.name;
    entry.auc_in_time = roc(model.in_time.scores, model.in_time.labels).auc;
    entry.auc_offline = roc(model.offline.scores, model.offline.labels).auc;
    entry.drop = entry.auc_in_time - entry.auc_offline;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const auto text = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  out << "threshold,fpr,tpr\n";
  for (const auto& point : curve.points) {
    out << text(point.threshold) << ',' << text(point.fpr) << ',' << text(point.tpr) << '\n';
  }
}

}  // namespace riskstream
