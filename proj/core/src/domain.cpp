#include "riskstream/domain.hpp"

#include <charconv>
#include <cstdlib>

#include "riskstream/errors.hpp"

namespace riskstream {

namespace {

// Shortest round-trip text for a double; integral values print without a dot.
std::string double_token(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Splits "sku_prefix3" into ("sku", 3). Returns false if the element does not
// follow the prefix convention.
bool parse_prefix_element(const std::string& element, std::string& base, std::size_t& n) {
  auto pos = element.rfind("_prefix");
  if (pos == std::string::npos || pos == 0) return false;
  const char* first = element.data() + pos + 7;
  const char* last = element.data() + element.size();
  if (first == last) return false;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || value == 0) return false;
  base = element.substr(0, pos);
  n = value;
  return true;
}

}  // namespace

std::string feature_token(const FeatureValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return double_token(std::get<double>(value));
}

std::string extract_entity_value(const Transaction& txn, const EntityDescriptor& desc) {
  std::string out;
  bool first = true;
  for (const auto& element : desc.extractor) {
    if (!first) out.push_back(kEntitySeparator);
    first = false;

    auto it = txn.static_features.find(element);
    if (it != txn.static_features.end()) {
      out += feature_token(it->second);
      continue;
    }
    std::string base;
    std::size_t n = 0;
    if (parse_prefix_element(element, base, n)) {
      auto base_it = txn.static_features.find(base);
      if (base_it != txn.static_features.end()) {
        std::string token = feature_token(base_it->second);
        out += token.substr(0, n);
        continue;
      }
    }
    out += kMissingFeatureToken;
  }
  return out;
}

AsOfLabel resolve_label(std::span<const FeedbackEvent> events,
                        const FeedbackPolicy& policy, Timestamp as_of) {
  for (const auto& event : events) {
    if (event.verdict != Verdict::fraud) continue;
    if (!policy.enabled(event.kind)) continue;
    if (event.arrival_time < as_of) return AsOfLabel::fraud;
  }
  return AsOfLabel::good_so_far;
}

std::string to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::chargeback: return "chargeback";
    case FeedbackKind::manual_review_reject: return "manual_review_reject";
    case FeedbackKind::system_reject: return "system_reject";
  }
  throw InternalError("unknown feedback kind");
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::fraud ? "fraud" : "legitimate";
}

FeedbackKind parse_feedback_kind(const std::string& text) {
  if (text == "chargeback") return FeedbackKind::chargeback;
  if (text == "manual_review_reject") return FeedbackKind::manual_review_reject;
  if (text == "system_reject") return FeedbackKind::system_reject;
  throw DataError("unknown feedback kind: " + text);
}

Verdict parse_verdict(const std::string& text) {
  if (text == "fraud") return Verdict::fraud;
  if (text == "legitimate") return Verdict::legitimate;
  throw DataError("unknown verdict: " + text);
}

}  // namespace riskstream
