#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskstream/profile_store.hpp"

namespace riskstream {

// The frame refresh grid {t_k}: epoch-aligned multiples of `period`.
struct UpdateSchedule {
  Duration period{days(1)};
  Timestamp epoch{0};

  void validate(Duration bucket_granularity) const;
  // Latest tick <= t; nullopt when t precedes the epoch.
  std::optional<Timestamp> tick_at_or_before(Timestamp t) const;
};

// Dynamic statistics of one entity value: fraud rate and weight of evidence
// per (window, weighting).
struct EntityStats {
  double fr[2][2]{};   // [Window][Weighting]
  double woe[2][2]{};  // [Window][Weighting]
};

// The dynamic risk features materialized at one tick: overall fraud rates
// plus per-descriptor, per-value entity statistics, computed from snapshots
// of both windows taken exactly at `at`. Frames are immutable once built.
struct FeatureFrame {
  Timestamp at;
  bool warm_up{false};
  double overall[2][2]{};  // [Window][Weighting]
  std::vector<std::map<std::string, EntityStats>> entities;  // per descriptor

  // Fallback statistics for values absent from both windows: entity FR falls
  // back to the window's overall rate, WoE to 0.
  EntityStats fallback() const;
};

// Builds the frame for tick t_k. The store must be advanced exactly to t_k;
// throws DataError("store not caught up") when it lags.
FeatureFrame compute_feature_frame(Timestamp t_k, const ProfileStore& store,
                                   double smoothing_alpha);

// Published frames in tick order; lookup is "latest frame at or before t".
class FrameSet {
 public:
  void publish(FeatureFrame frame);
  const FeatureFrame* frame_for(Timestamp txn_time) const;
  const std::vector<FeatureFrame>& frames() const { return frames_; }

 private:
  std::vector<FeatureFrame> frames_;
};

// Canonical dynamic-feature order: the four overall rates first, then per
// descriptor (configuration order) fraud rates then WoE, each short window
// before long, count before dollar. q = 4 + 8 * L names.
std::vector<std::string> dynamic_feature_names(std::span<const EntityDescriptor> descriptors);

// Dynamic feature values for one transaction, in canonical order, from the
// latest frame at or before its time. With no such frame every component is
// the warm-up fallback (overall 0, WoE 0).
std::vector<double> assemble_dynamic(const Transaction& txn, const FrameSet& frames,
                                     std::span<const EntityDescriptor> descriptors);

struct AssembledRow {
  std::int64_t id{0};
  Timestamp time;
  bool warm_up{false};
  Verdict final_label{Verdict::legitimate};
  FeatureMap static_features;
  std::vector<double> dynamic_features;
};

struct AssembledDataset {
  std::vector<std::string> static_names;   // p, sorted
  std::vector<std::string> dynamic_names;  // q, canonical order
  std::vector<AssembledRow> rows;          // stream order
};

// Replays the event log in global order, refreshing a frame at every
// schedule tick from events strictly before it.
FrameSet build_frames(std::span<const Transaction> txns,
                      std::span<const FeedbackEvent> feedback, const WindowConfig& windows,
                      std::span<const EntityDescriptor> descriptors,
                      const FeedbackPolicy& policy, const UpdateSchedule& schedule,
                      double smoothing_alpha, Duration bucket_granularity);

// Attaches the active frame's statistics to each transaction. Rows assembled
// from a warm-up frame (or from before the first frame) are flagged warm-up.
AssembledDataset assemble_dataset(std::span<const Transaction> txns,
                                  const std::unordered_map<std::int64_t, Verdict>& labels,
                                  const FrameSet& frames,
                                  std::span<const EntityDescriptor> descriptors);

// Row subset with the same schema.
AssembledDataset filter_rows(const AssembledDataset& dataset,
                             const std::function<bool(const AssembledRow&)>& keep);

// Audit export: CSV `t_k,entity,value,stat,window,weighting,value`; overall
// rows carry empty entity and value fields.
void write_frames_csv(const std::filesystem::path& path, const FrameSet& frames,
                      std::span<const EntityDescriptor> descriptors);

// Dataset export: `id,time,warm_up,label` then the p static and q dynamic
// columns, named in the header.
void write_dataset_csv(const std::filesystem::path& path, const AssembledDataset& dataset);
AssembledDataset read_dataset_csv(const std::filesystem::path& path, std::size_t dynamic_count);

}  // namespace riskstream
