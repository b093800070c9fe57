#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskstream/domain.hpp"
#include "riskstream/time.hpp"

namespace riskstream {

enum class Window { short_term, long_term };
enum class Weighting { count, dollar };

std::string to_string(Window w);
std::string to_string(Weighting w);

struct WindowConfig {
  Duration short_window{weeks(4)};
  Duration long_window{weeks(8)};

  void validate() const;
  Duration length(Window w) const {
    return w == Window::short_term ? short_window : long_window;
  }
};

// One row of the per-entity contingency table: good/fraud transaction counts
// and their dollar sums in minor units.
struct ProfileCell {
  std::int64_t fraud_count{0};
  std::int64_t good_count{0};
  std::int64_t fraud_amount{0};
  std::int64_t good_amount{0};

  void add(const ProfileCell& other) {
    fraud_count += other.fraud_count;
    good_count += other.good_count;
    fraud_amount += other.fraud_amount;
    good_amount += other.good_amount;
  }
};

// Windowed contingency table over one entity: a cell per observed value plus
// marginal totals. Marginals are maintained incrementally and always equal
// the column sums exactly.
class EntityProfileTable {
 public:
  void add(const std::string& value, const ProfileCell& cell);

  const ProfileCell* find(const std::string& value) const;
  const std::map<std::string, ProfileCell>& rows() const { return rows_; }
  std::size_t distinct_values() const { return rows_.size(); }

  const ProfileCell& marginals() const { return marginals_; }
  std::int64_t total_count() const { return marginals_.fraud_count + marginals_.good_count; }
  std::int64_t total_amount() const { return marginals_.fraud_amount + marginals_.good_amount; }

 private:
  std::map<std::string, ProfileCell> rows_;
  ProfileCell marginals_;
};

// Window fraud rate over the whole table: frauds / total, by count or dollar.
// An empty window yields the neutral fallback 0.0.
double overall_fr(const EntityProfileTable& table, Weighting weighting);

// Per-value fraud rate N_i1/N_i. (or the dollar analogue). Unseen values and
// zero denominators fall back to the window's overall rate.
double entity_fr(const EntityProfileTable& table, const std::string& value,
                 Weighting weighting);

// Weight of Evidence ln[(n_i1/n_.1)/(n_i0/n_.0)] on additively smoothed cells:
// every present cell gets +alpha and marginals are recomputed from the
// smoothed cells. The dollar variant smooths by alpha times the window's mean
// transaction amount. Unseen values score 0. Requires alpha > 0.
double woe(const EntityProfileTable& table, const std::string& value,
           Weighting weighting, double alpha);

struct ProfileSnapshot {
  Timestamp at;
  Window window{Window::short_term};
  bool warm_up{false};  // t earlier than one full window length
  std::vector<EntityProfileTable> tables;  // one per descriptor, config order
};

// Maintains the windowed per-entity tables under streaming ingestion.
//
// Semantics: a transaction enters every descriptor's table as good at its
// own time; the first enabled fraud-verdict feedback flips it to fraud from
// the feedback's arrival time on. snapshot(t, w) reproduces, exactly, the
// table a from-scratch rescan of the raw event log would build over the
// half-open window [t-w, t) with labels as of t.
//
// Events must be ingested in non-decreasing event-time order (transaction
// time / feedback arrival time). Snapshots are taken at the ingestion
// frontier: advance_to(t) declares everything before t delivered, after
// which snapshot(t, w) is exact. Nothing at or after t may be ingested yet.
//
// Storage is a ring of coarse time buckets holding pre-aggregated cells, so
// ingest is O(1) amortized and aligned snapshots never touch raw events;
// a probe time inside a bucket rescans only that boundary bucket. Buckets
// older than the long window are evicted lazily.
//
// Concurrency: single writer. Snapshots are detached values, safe to hand to
// any number of reader threads.
class ProfileStore {
 public:
  ProfileStore(WindowConfig windows, std::vector<EntityDescriptor> descriptors,
               FeedbackPolicy policy, Duration bucket_granularity = hours(1));

  void ingest(const Transaction& txn);
  void ingest(const FeedbackEvent& event);

  // Declares that every event with time < t has been delivered.
  void advance_to(Timestamp t);
  Timestamp watermark() const { return watermark_; }

  ProfileSnapshot snapshot(Timestamp t, Window window) const;

  const std::vector<EntityDescriptor>& descriptors() const { return descriptors_; }
  const WindowConfig& windows() const { return windows_; }
  Duration bucket_granularity() const { return bucket_; }

 private:
  struct TxnRecord {
    Timestamp time;
    std::int64_t amount{0};
    bool fraud{false};
    std::vector<std::string> values;  // entity value per descriptor
  };

  struct Bucket {
    std::vector<std::int64_t> txn_ids;
    // Aggregated cells per descriptor for O(1) full-bucket snapshots.
    std::vector<std::map<std::string, ProfileCell>> cells;
  };

  void check_clock(Timestamp event_time);
  void evict_expired();
  std::int64_t bucket_index(Timestamp t) const { return t.seconds / bucket_.seconds; }

  WindowConfig windows_;
  std::vector<EntityDescriptor> descriptors_;
  FeedbackPolicy policy_;
  Duration bucket_;

  std::map<std::int64_t, Bucket> buckets_;
  std::unordered_map<std::int64_t, TxnRecord> records_;
  Timestamp last_event_{-1};
  Timestamp watermark_{0};
  bool any_ingested_{false};
};

// Audit dump: CSV rows `entity,value,window,N1,N0,D1,D0`.
void write_profile_csv(const std::filesystem::path& path,
                       const std::vector<ProfileSnapshot>& snapshots,
                       const std::vector<EntityDescriptor>& descriptors);

}  // namespace riskstream
