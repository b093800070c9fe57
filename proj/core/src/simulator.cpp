#include "riskstream/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// Class-conditional distributions for the non-profiled static features. These
// are stationary: they give a static model genuine signal that survives drift.
struct CategoryDist {
  std::vector<std::string> values;
  std::vector<double> good_weights;
  std::vector<double> fraud_weights;
};

const CategoryDist& email_domain_dist() {
  static const CategoryDist dist{
      {"gmail.com", "yahoo.com", "outlook.com", "corp.example", "uni.example", "freemx.example"},
      {0.38, 0.22, 0.18, 0.12, 0.06, 0.04},
      {0.25, 0.15, 0.12, 0.05, 0.03, 0.40}};
  return dist;
}

const CategoryDist& device_dist() {
  static const CategoryDist dist{
      {"mobile", "desktop", "console"},
      {0.50, 0.40, 0.10},
      {0.35, 0.45, 0.20}};
  return dist;
}

Duration sample_delay(const DelaySpec& spec, Rng& rng) {
  switch (spec.family) {
    case DelaySpec::Family::fixed:
      return spec.min;
    case DelaySpec::Family::uniform:
      return seconds(rng.next_int(spec.min.seconds, spec.max.seconds));
  }
  throw InternalError("unknown delay family");
}

}  // namespace

const DelaySpec& DelayModel::for_kind(FeedbackKind kind) const {
  switch (kind) {
    case FeedbackKind::chargeback: return chargeback;
    case FeedbackKind::manual_review_reject: return manual_review_reject;
    case FeedbackKind::system_reject: return system_reject;
  }
  throw InternalError("unknown feedback kind");
}

void DriftScript::validate(Timestamp horizon) const {
  if (segments.empty()) throw ConfigError("drift script must cover horizon");
  Timestamp cursor{0};
  for (const auto& seg : segments) {
    if (seg.start != cursor) throw ConfigError("drift script must cover horizon");
    if (seg.end <= seg.start) throw ConfigError("drift script segment is empty");
    if (seg.fraud_prior < 0.0 || seg.fraud_prior > 1.0) {
      throw ConfigError("drift script fraud_prior must be in [0,1]");
    }
    for (const auto& [value, weight] : seg.population_mix) {
      if (!(weight > 0.0)) throw ConfigError("drift script population weight must be positive for " + value);
    }
    for (const auto& [value, mult] : seg.attack_targets) {
      if (mult < 0.0) throw ConfigError("drift script attack multiplier must be non-negative for " + value);
    }
    cursor = seg.end;
  }
  if (cursor < horizon) throw ConfigError("drift script must cover horizon");
}

const DriftSegment& DriftScript::at(Timestamp t) const {
  for (const auto& seg : segments) {
    if (t >= seg.start && t < seg.end) return seg;
  }
  throw InternalError("no drift segment covers t=" + std::to_string(t.seconds));
}

StreamData generate_stream(const DriftScript& script, const DelayModel& delays,
                           const PopulationSpec& population, const AmountRange& amounts,
                           double rate_per_day, Timestamp horizon, std::uint64_t seed) {
  if (horizon.seconds <= 0) throw ConfigError("horizon must be positive");
  if (!(rate_per_day > 0.0)) throw ConfigError("rate must be positive");
  if (population.entity_values.empty()) throw ConfigError("population has no entity values");
  if (amounts.min.cents <= 0 || amounts.max < amounts.min) throw ConfigError("bad amount range");
  script.validate(horizon);

  // Uniform spacing: the i-th transaction lands at floor(i * day / rate).
  const double spacing = static_cast<double>(kSecondsPerDay) / rate_per_day;
  const auto count = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(horizon.seconds) / spacing - 1e-9));

  Rng rng(seed);
  StreamData out;
  out.transactions.reserve(static_cast<std::size_t>(count));
  std::unordered_set<std::int64_t> used_ids;
  used_ids.reserve(static_cast<std::size_t>(count) * 2);

  const auto& emails = email_domain_dist();
  const auto& devices = device_dist();
  std::vector<double> mix(population.entity_values.size());

  for (std::int64_t i = 0; i < count; ++i) {
    const Timestamp t{static_cast<std::int64_t>(static_cast<double>(i) * spacing)};
    if (t >= horizon) break;
    const DriftSegment& seg = script.at(t);

    for (std::size_t v = 0; v < mix.size(); ++v) {
      auto it = seg.population_mix.find(population.entity_values[v]);
      mix[v] = it == seg.population_mix.end() ? 1.0 : it->second;
    }
    const std::string& value = population.entity_values[rng.pick_weighted(mix)];

    double p_fraud = seg.fraud_prior;
    if (auto it = seg.attack_targets.find(value); it != seg.attack_targets.end()) {
      p_fraud *= it->second;
    }
    p_fraud = std::clamp(p_fraud, 0.0, 1.0);
    const bool is_fraud = rng.next_bernoulli(p_fraud);

    double cents = rng.next_log_uniform(static_cast<double>(amounts.min.cents),
                                        static_cast<double>(amounts.max.cents));
    if (is_fraud) cents *= amounts.fraud_multiplier * seg.fraud_amount_multiplier;
    const Money amount{std::max<std::int64_t>(1, std::llround(cents))};

    const auto& email_w = is_fraud ? emails.fraud_weights : emails.good_weights;
    const auto& device_w = is_fraud ? devices.fraud_weights : devices.good_weights;
    const std::string& email = emails.values[rng.pick_weighted(email_w)];
    const std::string& device = devices.values[rng.pick_weighted(device_w)];
    const double account_age = static_cast<double>(
        is_fraud ? rng.next_int(0, 1200) : rng.next_int(0, 2000));

    std::int64_t id;
    do {
      id = static_cast<std::int64_t>(rng.next_u64() >> 1);
    } while (!used_ids.insert(id).second);

    Transaction txn;
    txn.id = id;
    txn.time = t;
    txn.amount = amount;
    txn.static_features[population.entity_feature] = value;
    txn.static_features["email_domain"] = email;
    txn.static_features["device"] = device;
    txn.static_features["account_age_days"] = account_age;
    txn.static_features["amount"] = static_cast<double>(amount.cents) / 100.0;
    out.transactions.push_back(std::move(txn));

    out.final_labels.emplace(id, is_fraud ? Verdict::fraud : Verdict::legitimate);

    if (is_fraud) {
      for (FeedbackKind kind : {FeedbackKind::chargeback, FeedbackKind::manual_review_reject,
                                FeedbackKind::system_reject}) {
        const DelaySpec& spec = delays.for_kind(kind);
        if (!rng.next_bernoulli(spec.emission_probability)) continue;
        out.feedback.push_back(
            {id, kind, t + sample_delay(spec, rng), Verdict::fraud});
      }
    }
  }

  std::sort(out.feedback.begin(), out.feedback.end(), [](const auto& a, const auto& b) {
    return std::tie(a.arrival_time.seconds, a.transaction_id, a.kind) <
           std::tie(b.arrival_time.seconds, b.transaction_id, b.kind);
  });
  return out;
}

std::vector<ReplayEvent> merge_stream(std::span<const Transaction> txns,
                                      std::span<const FeedbackEvent> feedback) {
  std::unordered_map<std::int64_t, Timestamp> txn_times;
  txn_times.reserve(txns.size() * 2);
  std::vector<ReplayEvent> events;
  events.reserve(txns.size() + feedback.size());

  for (const auto& txn : txns) {
    txn_times.emplace(txn.id, txn.time);
    events.push_back({txn.time, &txn, nullptr});
  }
  for (const auto& event : feedback) {
    auto it = txn_times.find(event.transaction_id);
    if (it == txn_times.end()) {
      throw DataError("feedback references unknown transaction id " +
                      std::to_string(event.transaction_id));
    }
    if (event.arrival_time < it->second) {
      throw DataError("feedback for transaction " + std::to_string(event.transaction_id) +
                      " arrives before the transaction");
    }
    events.push_back({event.arrival_time, nullptr, &event});
  }

  std::stable_sort(events.begin(), events.end(), [](const ReplayEvent& a, const ReplayEvent& b) {
    const int a_fb = a.is_transaction() ? 0 : 1;
    const int b_fb = b.is_transaction() ? 0 : 1;
    const std::int64_t a_id = a.is_transaction() ? a.transaction->id : a.feedback->transaction_id;
    const std::int64_t b_id = b.is_transaction() ? b.transaction->id : b.feedback->transaction_id;
    const int a_kind = a.is_transaction() ? -1 : static_cast<int>(a.feedback->kind);
    const int b_kind = b.is_transaction() ? -1 : static_cast<int>(b.feedback->kind);
    return std::tie(a.time.seconds, a_fb, a_id, a_kind) <
           std::tie(b.time.seconds, b_fb, b_id, b_kind);
  });
  return events;
}

void replay(std::span<const Transaction> txns, std::span<const FeedbackEvent> feedback,
            const std::function<void(const ReplayEvent&)>& visit) {
  for (const auto& event : merge_stream(txns, feedback)) visit(event);
}

}  // namespace riskstream
