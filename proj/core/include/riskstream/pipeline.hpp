#pragma once

#include <filesystem>
#include <optional>

#include "riskstream/config.hpp"

namespace riskstream {

// Canonical artifact names inside the output directory. Every stage consumes
// the previous stage's files, so the pipeline is resumable stage by stage.
namespace artifact {
inline constexpr const char* kTransactions = "transactions.jsonl";
inline constexpr const char* kFeedback = "feedback.jsonl";
inline constexpr const char* kGroundTruth = "ground_truth.csv";
inline constexpr const char* kProfiles = "profiles.csv";
inline constexpr const char* kFrames = "frames.csv";
inline constexpr const char* kDataset = "assembled.csv";
inline constexpr const char* kModelStatic = "model_static.json";
inline constexpr const char* kModelDynamic = "model_dynamic.json";
inline constexpr const char* kRocStatic = "roc_static.csv";
inline constexpr const char* kRocDynamic = "roc_dynamic.csv";
inline constexpr const char* kSummary = "summary.json";
}  // namespace artifact

// Stage entry points. Each validates the config, reads its inputs from disk,
// and writes its outputs under `out`and nothing else, so a fixed config and
// seed produce byte-identical artifacts on every run.
void run_simulate(const RunConfig& config, const std::filesystem::path& out);
void run_profile_dump(const RunConfig& config, const std::filesystem::path& out,
                      std::optional<Timestamp> at = std::nullopt);
void run_assemble(const RunConfig& config, const std::filesystem::path& out);
void run_train(const RunConfig& config, const std::filesystem::path& out);
void run_evaluate(const RunConfig& config, const std::filesystem::path& out);
void run_all(const RunConfig& config, const std::filesystem::path& out);

}  // namespace riskstream
