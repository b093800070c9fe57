#include "riskstream/profile_store.hpp"

#include <cmath>
#include <fstream>

#include "riskstream/errors.hpp"

namespace riskstream {

std::string to_string(Window w) {
  return w == Window::short_term ? "short" : "long";
}

std::string to_string(Weighting w) {
  return w == Weighting::count ? "count" : "dollar";
}

void WindowConfig::validate() const {
  if (short_window.seconds <= 0 || short_window >= long_window) {
    throw ConfigError(
        "profile.short_length must be positive and smaller than profile.long_length");
  }
}

void EntityProfileTable::add(const std::string& value, const ProfileCell& cell) {
  rows_[value].add(cell);
  marginals_.add(cell);
}

const ProfileCell* EntityProfileTable::find(const std::string& value) const {
  auto it = rows_.find(value);
  return it == rows_.end() ? nullptr : &it->second;
}

double overall_fr(const EntityProfileTable& table, Weighting weighting) {
  const auto& m = table.marginals();
  const std::int64_t fraud = weighting == Weighting::count ? m.fraud_count : m.fraud_amount;
  const std::int64_t total = weighting == Weighting::count ? m.fraud_count + m.good_count
                                                           : m.fraud_amount + m.good_amount;
  if (total == 0) return 0.0;
  return static_cast<double>(fraud) / static_cast<double>(total);
}

double entity_fr(const EntityProfileTable& table, const std::string& value,
                 Weighting weighting) {
  const ProfileCell* row = table.find(value);
  if (row == nullptr) return overall_fr(table, weighting);
  const std::int64_t fraud = weighting == Weighting::count ? row->fraud_count : row->fraud_amount;
  const std::int64_t total = weighting == Weighting::count ? row->fraud_count + row->good_count
                                                           : row->fraud_amount + row->good_amount;
  if (total == 0) return overall_fr(table, weighting);
  return static_cast<double>(fraud) / static_cast<double>(total);
}

double woe(const EntityProfileTable& table, const std::string& value,
           Weighting weighting, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("profile.smoothing_alpha must be > 0");
  const ProfileCell* row = table.find(value);
  if (row == nullptr) return 0.0;

  const auto k = static_cast<double>(table.distinct_values());
  const auto& m = table.marginals();

  double cell_alpha = alpha;
  double row_fraud, row_good, margin_fraud, margin_good;
  if (weighting == Weighting::count) {
    row_fraud = static_cast<double>(row->fraud_count);
    row_good = static_cast<double>(row->good_count);
    margin_fraud = static_cast<double>(m.fraud_count);
    margin_good = static_cast<double>(m.good_count);
  } else {
    // Dollar cells are smoothed in minor units scaled by the window's mean
    // transaction amount, so the pseudo-observation has the weight of one
    // typical transaction.
    const std::int64_t n = table.total_count();
    cell_alpha = alpha * (n > 0 ? static_cast<double>(table.total_amount()) /
                                      static_cast<double>(n)
                                : 1.0);
    row_fraud = static_cast<double>(row->fraud_amount);
    row_good = static_cast<double>(row->good_amount);
    margin_fraud = static_cast<double>(m.fraud_amount);
    margin_good = static_cast<double>(m.good_amount);
  }

  const double n1 = row_fraud + cell_alpha;
  const double n0 = row_good + cell_alpha;
  const double m1 = margin_fraud + k * cell_alpha;
  const double m0 = margin_good + k * cell_alpha;
  return std::log((n1 / m1) / (n0 / m0));
}

ProfileStore::ProfileStore(WindowConfig windows, std::vector<EntityDescriptor> descriptors,
                           FeedbackPolicy policy, Duration bucket_granularity)
    : windows_(windows),
      descriptors_(std::move(descriptors)),
      policy_(policy),
      bucket_(bucket_granularity) {
  windows_.validate();
  if (bucket_.seconds <= 0) throw ConfigError("profile.bucket_granularity must be positive");
  if (descriptors_.empty()) throw ConfigError("profile.descriptors must not be empty");
  for (const auto& desc : descriptors_) {
    if (desc.extractor.empty()) {
      throw ConfigError("profile.descriptors." + desc.name + " has an empty extractor");
    }
  }
}

void ProfileStore::check_clock(Timestamp event_time) {
  if (event_time.seconds < 0) throw DataError("negative event time");
  if (any_ingested_ && event_time < last_event_) throw DataError("non-monotonic clock");
  last_event_ = event_time;
  any_ingested_ = true;
  if (event_time > watermark_) watermark_ = event_time;
}

void ProfileStore::ingest(const Transaction& txn) {
  check_clock(txn.time);

  TxnRecord record;
  record.time = txn.time;
  record.amount = txn.amount.cents;
  record.values.reserve(descriptors_.size());
  for (const auto& desc : descriptors_) {
    record.values.push_back(extract_entity_value(txn, desc));
  }

  Bucket& bucket = buckets_[bucket_index(txn.time)];
  if (bucket.cells.empty()) bucket.cells.resize(descriptors_.size());
  bucket.txn_ids.push_back(txn.id);
  for (std::size_t d = 0; d < descriptors_.size(); ++d) {
    ProfileCell& cell = bucket.cells[d][record.values[d]];
    cell.good_count += 1;
    cell.good_amount += record.amount;
  }
  if (!records_.emplace(txn.id, std::move(record)).second) {
    throw DataError("duplicate transaction id " + std::to_string(txn.id));
  }
  evict_expired();
}

void ProfileStore::ingest(const FeedbackEvent& event) {
  check_clock(event.arrival_time);
  if (event.verdict != Verdict::fraud || !policy_.enabled(event.kind)) return;

  auto it = records_.find(event.transaction_id);
  if (it == records_.end()) return;  // older than the long window, already evicted
  TxnRecord& record = it->second;
  if (record.fraud) return;  // already flipped by an earlier signal
  record.fraud = true;

  Bucket& bucket = buckets_.at(bucket_index(record.time));
  for (std::size_t d = 0; d < descriptors_.size(); ++d) {
    ProfileCell& cell = bucket.cells[d].at(record.values[d]);
    cell.good_count -= 1;
    cell.good_amount -= record.amount;
    cell.fraud_count += 1;
    cell.fraud_amount += record.amount;
  }
}

void ProfileStore::advance_to(Timestamp t) {
  if (any_ingested_ && t < last_event_) {
    throw DataError("non-monotonic clock");
  }
  if (t > watermark_) watermark_ = t;
  evict_expired();
}

void ProfileStore::evict_expired() {
  const Timestamp cutoff = watermark_ - windows_.long_window;
  while (!buckets_.empty()) {
    auto it = buckets_.begin();
    const Timestamp bucket_end{(it->first + 1) * bucket_.seconds};
    if (bucket_end > cutoff) break;
    for (std::int64_t id : it->second.txn_ids) records_.erase(id);
    buckets_.erase(it);
  }
}

ProfileSnapshot ProfileStore::snapshot(Timestamp t, Window window) const {
  // Exactness holds only at the ingestion frontier: everything before t is
  // in, nothing at or after t is, and no needed bucket has been evicted.
  if (t != watermark_) {
    throw InternalError("snapshot at t=" + std::to_string(t.seconds) +
                        " away from watermark " + std::to_string(watermark_.seconds));
  }
  if (any_ingested_ && t <= last_event_) {
    throw InternalError("snapshot at t=" + std::to_string(t.seconds) +
                        " would straddle ingested events");
  }

  const Duration length = windows_.length(window);
  const Timestamp start = t - length;

  ProfileSnapshot snap;
  snap.at = t;
  snap.window = window;
  snap.warm_up = t.seconds < length.seconds;
  snap.tables.resize(descriptors_.size());

  const std::int64_t first_bucket =
      start.seconds >= 0 ? start.seconds / bucket_.seconds
                         : (start.seconds - bucket_.seconds + 1) / bucket_.seconds;
  for (auto it = buckets_.lower_bound(first_bucket); it != buckets_.end(); ++it) {
    const Timestamp bucket_start{it->first * bucket_.seconds};
    if (bucket_start >= start) {
      // Fully covered: every ingested event is < t, so the aggregate applies.
      for (std::size_t d = 0; d < descriptors_.size(); ++d) {
        for (const auto& [value, cell] : it->second.cells[d]) {
          snap.tables[d].add(value, cell);
        }
      }
    } else {
      // Boundary bucket: the window starts inside it, rescan its events.
      for (std::int64_t id : it->second.txn_ids) {
        const TxnRecord& record = records_.at(id);
        if (record.time < start) continue;
        ProfileCell cell;
        if (record.fraud) {
          cell.fraud_count = 1;
          cell.fraud_amount = record.amount;
        } else {
          cell.good_count = 1;
          cell.good_amount = record.amount;
        }
        for (std::size_t d = 0; d < descriptors_.size(); ++d) {
          snap.tables[d].add(record.values[d], cell);
        }
      }
    }
  }
  return snap;
}

void write_profile_csv(const std::filesystem::path& path,
                       const std::vector<ProfileSnapshot>& snapshots,
                       const std::vector<EntityDescriptor>& descriptors) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "entity,value,window,N1,N0,D1,D0\n";
  for (const auto& snap : snapshots) {
    for (std::size_t d = 0; d < snap.tables.size(); ++d) {
      for (const auto& [value, cell] : snap.tables[d].rows()) {
        out << descriptors[d].name << ',' << value << ',' << to_string(snap.window) << ','
            << cell.fraud_count << ',' << cell.good_count << ',' << cell.fraud_amount << ','
            << cell.good_amount << '\n';
      }
    }
  }
}

}  // namespace riskstream
