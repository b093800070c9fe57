#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskstream/time.hpp"

namespace riskstream {

// Monetary amount in minor currency units (cents). Never negative.
struct Money {
  std::int64_t cents{0};
  constexpr auto operator<=>(const Money&) const = default;
};

// A static transaction feature is either categorical text or a number.
using FeatureValue = std::variant<std::string, double>;

// Ordered map so every serialization of a transaction is byte-stable.
using FeatureMap = std::map<std::string, FeatureValue>;

// Canonical text form of a feature value, used when building entity values.
std::string feature_token(const FeatureValue& value);

struct Transaction {
  std::int64_t id{0};
  Timestamp time;
  Money amount;
  FeatureMap static_features;
};

// An entity is a named concatenation of static feature values. An extractor
// element "<feature>_prefix<N>" takes the first N characters of <feature>,
// unless the transaction carries a feature literally named that.
struct EntityDescriptor {
  std::string name;
  std::vector<std::string> extractor;
};

inline constexpr const char* kMissingFeatureToken = "UNKNOWN";
inline constexpr char kEntitySeparator = '|';

// Deterministic concatenation of the extractor's feature values in order.
// Absent features contribute the UNKNOWN sentinel; this never fails.
std::string extract_entity_value(const Transaction& txn, const EntityDescriptor& desc);

enum class FeedbackKind { chargeback, manual_review_reject, system_reject };
enum class Verdict { fraud, legitimate };

// A delayed fraud/legitimate signal tied to one transaction. Chargebacks
// arrive weeks to months late, manual-review decisions within hours, system
// rejects near real time.
struct FeedbackEvent {
  std::int64_t transaction_id{0};
  FeedbackKind kind{FeedbackKind::chargeback};
  Timestamp arrival_time;
  Verdict verdict{Verdict::fraud};
};

enum class AsOfLabel { good_so_far, fraud };

struct LabelState {
  AsOfLabel as_of_label{AsOfLabel::good_so_far};
  Verdict final_label{Verdict::legitimate};
};

// Which feedback kinds count as fraud evidence. System rejects are automatic
// decisions whose reliability can be doubtful, so they are switchable.
struct FeedbackPolicy {
  bool use_chargeback{true};
  bool use_manual_review_reject{true};
  bool use_system_reject{true};

  bool enabled(FeedbackKind kind) const {
    switch (kind) {
      case FeedbackKind::chargeback: return use_chargeback;
      case FeedbackKind::manual_review_reject: return use_manual_review_reject;
      case FeedbackKind::system_reject: return use_system_reject;
    }
    return false;
  }
};

// Label of one transaction as of a point in time: fraud if any enabled
// fraud-verdict feedback arrived strictly before `as_of`, good-so-far
// otherwise. Legitimate-verdict events never flip a label.
AsOfLabel resolve_label(std::span<const FeedbackEvent> events,
                        const FeedbackPolicy& policy, Timestamp as_of);

std::string to_string(FeedbackKind kind);
std::string to_string(Verdict verdict);
FeedbackKind parse_feedback_kind(const std::string& text);
Verdict parse_verdict(const std::string& text);

}  // namespace riskstream
