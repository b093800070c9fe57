#include "riskstream/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "riskstream/errors.hpp"
#include "riskstream/evaluation.hpp"
#include "riskstream/jsonl.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

using json = nlohmann::json;

namespace {

std::filesystem::path artifact_path(const std::filesystem::path& out, const char* name) {
  return out / name;
}

void require_artifact(const std::filesystem::path& path, const char* producing_stage) {
  if (!std::filesystem::exists(path)) {
    throw DataError("missing artifact " + path.string() + "; run `" +
                    std::string(producing_stage) + "` first");
  }
}

struct LoadedStream {
  std::vector<Transaction> transactions;
  std::vector<FeedbackEvent> feedback;
  std::unordered_map<std::int64_t, Verdict> labels;
};

LoadedStream load_stream(const std::filesystem::path& out) {
  const auto txn_path = artifact_path(out, artifact::kTransactions);
  require_artifact(txn_path, "simulate");
  LoadedStream stream;
  stream.transactions = read_transactions_jsonl(txn_path);
  stream.feedback = read_feedback_jsonl(artifact_path(out, artifact::kFeedback));
  stream.labels = read_ground_truth_csv(artifact_path(out, artifact::kGroundTruth));
  return stream;
}

SplitSpec split_spec(const RunConfig& config) {
  SplitSpec spec;
  spec.mode = SplitSpec::Mode::random;  // the temporal boundary is applied beforehand
  spec.train_fraction = config.evaluation.train_fraction;
  spec.seed = derive_seed(config.simulator.seed, "split");
  return spec;
}

// Rows the models may learn from: past the warm-up and, under a temporal
// holdout, before the boundary.
AssembledDataset in_range_rows(const AssembledDataset& dataset, const RunConfig& config) {
  if (config.evaluation.split_mode == SplitSpec::Mode::random) {
    return filter_rows(dataset, [](const AssembledRow& row) { return !row.warm_up; });
  }
  const Timestamp boundary = config.evaluation.holdout_boundary;
  return filter_rows(dataset, [&](const AssembledRow& row) {
    return !row.warm_up && row.time < boundary;
  });
}

struct SliceScores {
  ScoredSlice by_static;
  ScoredSlice by_dynamic;
  std::size_t rows{0};
};

SliceScores score_slice(const AssembledDataset& slice, const TrainedModel& model_static,
                        const TrainedModel& model_dynamic) {
  SliceScores scores;
  scores.rows = slice.rows.size();
  scores.by_static.scores.reserve(slice.rows.size());
  scores.by_dynamic.scores.reserve(slice.rows.size());
  for (const auto& row : slice.rows) {
    const int label = row.final_label == Verdict::fraud ? 1 : 0;
    scores.by_static.scores.push_back(model_static.score(row));
    scores.by_static.labels.push_back(label);
    scores.by_dynamic.scores.push_back(model_dynamic.score(row));
    scores.by_dynamic.labels.push_back(label);
  }
  return scores;
}

json lift_to_json(const LiftReport& report) {
  json out{{"fpr_anchor", report.fpr_anchor},
           {"tpr_anchor", report.tpr_anchor},
           {"tpr_static_at_anchor", report.tpr_static_at_anchor},
           {"tpr_dynamic_at_anchor", report.tpr_dynamic_at_anchor},
           {"fpr_static_at_anchor", report.fpr_static_at_anchor},
           {"fpr_dynamic_at_anchor", report.fpr_dynamic_at_anchor}};
  out["tpr_lift_at_fpr"] =
      report.tpr_lift_at_fpr ? json(*report.tpr_lift_at_fpr) : json(nullptr);
  out["fpr_reduction_at_tpr"] =
      report.fpr_reduction_at_tpr ? json(*report.fpr_reduction_at_tpr) : json(nullptr);
  return out;
}

}  // namespace

void run_simulate(const RunConfig& config, const std::filesystem::path& out) {
  config.validate();
  std::filesystem::create_directories(out);
  const StreamData stream = generate_stream(
      config.simulator.script, config.simulator.delays, config.simulator.population,
      config.simulator.amounts, config.simulator.rate_per_day, config.simulator.horizon,
      derive_seed(config.simulator.seed, "simulate"));
  write_transactions_jsonl(artifact_path(out, artifact::kTransactions), stream.transactions);
  write_feedback_jsonl(artifact_path(out, artifact::kFeedback), stream.feedback);
  write_ground_truth_csv(artifact_path(out, artifact::kGroundTruth), stream.transactions,
                         stream.final_labels);
}

void run_profile_dump(const RunConfig& config, const std::filesystem::path& out,
                      std::optional<Timestamp> at) {
  config.validate();
  const LoadedStream stream = load_stream(out);
  const Timestamp dump_at = at.value_or(config.simulator.horizon);
  if (dump_at.seconds < 0) throw ConfigError("profile dump time must be non-negative");

  ProfileStore store(config.profile.windows, config.profile.descriptors, config.profile.policy,
                     config.profile.bucket_granularity);
  for (const ReplayEvent& event : merge_stream(stream.transactions, stream.feedback)) {
    if (event.time >= dump_at) break;
    if (event.is_transaction()) {
      store.ingest(*event.transaction);
    } else {
      store.ingest(*event.feedback);
    }
  }
  store.advance_to(dump_at);
  const std::vector<ProfileSnapshot> snapshots = {store.snapshot(dump_at, Window::short_term),
                                                  store.snapshot(dump_at, Window::long_term)};
  write_profile_csv(artifact_path(out, artifact::kProfiles), snapshots,
                    config.profile.descriptors);
}

void run_assemble(const RunConfig& config, const std::filesystem::path& out) {
  config.validate();
  const LoadedStream stream = load_stream(out);
  const FrameSet frames = build_frames(
      stream.transactions, stream.feedback, config.profile.windows, config.profile.descriptors,
      config.profile.policy, config.schedule, config.profile.smoothing_alpha,
      config.profile.bucket_granularity);
  write_frames_csv(artifact_path(out, artifact::kFrames), frames, config.profile.descriptors);
  const AssembledDataset dataset =
      assemble_dataset(stream.transactions, stream.labels, frames, config.profile.descriptors);
  write_dataset_csv(artifact_path(out, artifact::kDataset), dataset);
}

void run_train(const RunConfig& config, const std::filesystem::path& out) {
  config.validate();
  const auto dataset_path = artifact_path(out, artifact::kDataset);
  require_artifact(dataset_path, "assemble");
  const AssembledDataset dataset =
      read_dataset_csv(dataset_path, dynamic_feature_names(config.profile.descriptors).size());

  const AssembledDataset in_range = in_range_rows(dataset, config);
  const SplitSpec spec = split_spec(config);

  Hyperparams params = config.model;
  for (ModelMode mode : {ModelMode::static_only, ModelMode::dynamic}) {
    const TrainingView view = make_training_view(in_range, mode, spec, params.max_categories);
    const TrainedModel model = train(view.train, view.encoder, params);
    model.save(artifact_path(out, mode == ModelMode::static_only ? artifact::kModelStatic
                                                                 : artifact::kModelDynamic));
  }
}

void run_evaluate(const RunConfig& config, const std::filesystem::path& out) {
  config.validate();
  const auto dataset_path = artifact_path(out, artifact::kDataset);
  require_artifact(dataset_path, "assemble");
  require_artifact(artifact_path(out, artifact::kModelStatic), "train");
  require_artifact(artifact_path(out, artifact::kModelDynamic), "train");

  const AssembledDataset dataset =
      read_dataset_csv(dataset_path, dynamic_feature_names(config.profile.descriptors).size());
  const TrainedModel model_static = TrainedModel::load(artifact_path(out, artifact::kModelStatic));
  const TrainedModel model_dynamic =
      TrainedModel::load(artifact_path(out, artifact::kModelDynamic));

  const AssembledDataset in_range = in_range_rows(dataset, config);
  const SplitSpec spec = split_spec(config);

  // Same shuffle as the train stage, so the held-out rows are exactly the
  // ones no model saw.
  const TrainingView view = make_training_view(in_range, ModelMode::static_only, spec,
                                               config.model.max_categories);
  std::unordered_map<std::int64_t, bool> is_test;
  is_test.reserve(view.test.ids.size() * 2);
  for (std::int64_t id : view.test.ids) is_test.emplace(id, true);

  const AssembledDataset test_slice = filter_rows(
      in_range, [&](const AssembledRow& row) { return is_test.contains(row.id); });
  const SliceScores test_scores = score_slice(test_slice, model_static, model_dynamic);

  json summary{{"version", 1},
               {"seed", config.simulator.seed},
               {"split_mode",
                config.evaluation.split_mode == SplitSpec::Mode::random ? "random" : "temporal"},
               {"counts",
                {{"rows", dataset.rows.size()},
                 {"usable_rows", in_range.rows.size() },
                 {"train_rows", view.train.rows()},
                 {"test_rows", view.test.rows()}}}};

  if (config.evaluation.split_mode == SplitSpec::Mode::random) {
    const RocCurve roc_static = roc(test_scores.by_static.scores, test_scores.by_static.labels);
    const RocCurve roc_dynamic =
        roc(test_scores.by_dynamic.scores, test_scores.by_dynamic.labels);
    write_roc_csv(artifact_path(out, artifact::kRocStatic), roc_static);
    write_roc_csv(artifact_path(out, artifact::kRocDynamic), roc_dynamic);
    const LiftReport lifts =
        compare_models(test_scores.by_static.scores, test_scores.by_dynamic.scores,
                       test_scores.by_static.labels, config.evaluation.fpr_anchor,
                       config.evaluation.tpr_anchor);
    summary["models"] = {{"static", {{"auc_test", roc_static.auc}}},
                         {"dynamic", {{"auc_test", roc_dynamic.auc}}}};
    summary["lifts"] = lift_to_json(lifts);
    summary["degradation"] = nullptr;
  } else {
    const Timestamp boundary = config.evaluation.holdout_boundary;
    const AssembledDataset offline_slice = filter_rows(dataset, [&](const AssembledRow& row) {
      return !row.warm_up && row.time >= boundary;
    });
    if (offline_slice.rows.empty()) throw DataError("empty slice for offline evaluation");
    const SliceScores offline_scores = score_slice(offline_slice, model_static, model_dynamic);

    const std::vector<ModelSlices> slices = {
        {"static", test_scores.by_static, offline_scores.by_static},
        {"dynamic", test_scores.by_dynamic, offline_scores.by_dynamic}};
    const DegradationReport degradation = degradation_study(slices);

    const RocCurve roc_static =
        roc(offline_scores.by_static.scores, offline_scores.by_static.labels);
    const RocCurve roc_dynamic =
        roc(offline_scores.by_dynamic.scores, offline_scores.by_dynamic.labels);
    write_roc_csv(artifact_path(out, artifact::kRocStatic), roc_static);
    write_roc_csv(artifact_path(out, artifact::kRocDynamic), roc_dynamic);

    const LiftReport lifts =
        compare_models(offline_scores.by_static.scores, offline_scores.by_dynamic.scores,
                       offline_scores.by_static.labels, config.evaluation.fpr_anchor,
                       config.evaluation.tpr_anchor);

    summary["counts"]["offline_rows"] = offline_slice.rows.size();
    json models = json::object();
    for (const auto& entry : degradation.entries) {
      models[entry.model] = {{"auc_in_time", entry.auc_in_time},
                             {"auc_offline", entry.auc_offline},
                             {"drop", entry.drop}};
    }
    summary["models"] = std::move(models);
    summary["lifts"] = lift_to_json(lifts);
    summary["degradation"] = {
        {"static_drop", degradation.entries[0].drop},
        {"dynamic_drop", degradation.entries[1].drop},
        {"drop_difference", degradation.entries[0].drop - degradation.entries[1].drop}};
  }

  std::ofstream summary_out(artifact_path(out, artifact::kSummary), std::ios::trunc);
  if (!summary_out) throw DataError("cannot write summary");
  summary_out << summary.dump(2) << '\n';
}

void run_all(const RunConfig& config, const std::filesystem::path& out) {
  run_simulate(config, out);
  run_profile_dump(config, out);
  run_assemble(config, out);
  run_train(config, out);
  run_evaluate(config, out);
}

}  // namespace riskstream
