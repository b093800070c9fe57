#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskstream/domain.hpp"
#include "riskstream/time.hpp"

namespace riskstream {

// Delay behaviour of one feedback kind: how long after the transaction the
// signal arrives and how often it is emitted at all.
struct DelaySpec {
  enum class Family { fixed, uniform };
  Family family{Family::fixed};
  Duration min{0};
  Duration max{0};
  double emission_probability{1.0};

  Duration min_delay() const { return min; }
};

struct DelayModel {
  DelaySpec chargeback{DelaySpec::Family::uniform, days(14), days(56), 0.9};
  DelaySpec manual_review_reject{DelaySpec::Family::uniform, minutes(10), hours(3), 0.35};
  DelaySpec system_reject{DelaySpec::Family::fixed, seconds(0), seconds(0), 0.1};

  const DelaySpec& for_kind(FeedbackKind kind) const;
};

// One phase of the scripted stream. Within the segment, the profiled entity
// value is sampled from population_mix (empty mix = uniform over the
// configured values) and a transaction on value v turns fraudulent with
// probability clamp(fraud_prior * attack_targets[v], 0, 1).
struct DriftSegment {
  Timestamp start;
  Timestamp end;
  double fraud_prior{0.0};
  std::map<std::string, double> attack_targets;
  std::map<std::string, double> population_mix;
  double fraud_amount_multiplier{1.0};
};

struct DriftScript {
  std::vector<DriftSegment> segments;

  // Segments must be non-empty, ordered, non-overlapping, and cover [0, horizon).
  void validate(Timestamp horizon) const;
  const DriftSegment& at(Timestamp t) const;
};

// The feature the drift script keys on, plus its value universe.
struct PopulationSpec {
  std::string entity_feature{"product"};
  std::vector<std::string> entity_values;
};

struct AmountRange {
  Money min{500};
  Money max{50000};
  double fraud_multiplier{1.0};
};

struct StreamData {
  std::vector<Transaction> transactions;                      // time order
  std::vector<FeedbackEvent> feedback;                        // arrival order
  std::unordered_map<std::int64_t, Verdict> final_labels;     // simulator truth
};

// Deterministic synthetic stream: uniform inter-arrival spacing at
// `rate_per_day`, scripted drift, and delayed feedback for fraud rows.
// Throws ConfigError when the script does not cover the horizon.
StreamData generate_stream(const DriftScript& script, const DelayModel& delays,
                           const PopulationSpec& population, const AmountRange& amounts,
                           double rate_per_day, Timestamp horizon, std::uint64_t seed);

// One element of the merged stream: exactly one of the two pointers is set.
struct ReplayEvent {
  Timestamp time;
  const Transaction* transaction{nullptr};
  const FeedbackEvent* feedback{nullptr};

  bool is_transaction() const { return transaction != nullptr; }
};

// Merged global ordering of transactions (by time) and feedback (by
// arrival_time); ties deliver the transaction first, then feedback by
// (transaction_id, kind). Throws DataError on feedback for unknown ids.
std::vector<ReplayEvent> merge_stream(std::span<const Transaction> txns,
                                      std::span<const FeedbackEvent> feedback);

void replay(std::span<const Transaction> txns, std::span<const FeedbackEvent> feedback,
            const std::function<void(const ReplayEvent&)>& visit);

}  // namespace riskstream
