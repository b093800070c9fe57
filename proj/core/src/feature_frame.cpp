#include "riskstream/feature_frame.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "riskstream/errors.hpp"
#include "riskstream/simulator.hpp"

namespace riskstream {

namespace {

constexpr Window kWindows[] = {Window::short_term, Window::long_term};
constexpr Weighting kWeightings[] = {Weighting::count, Weighting::dollar};

std::string double_text(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Minimal CSV quoting; values are quoted only when they need to be.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

void UpdateSchedule::validate(Duration bucket_granularity) const {
  if (period.seconds <= 0) throw ConfigError("schedule.period must be positive");
  if (epoch.seconds < 0) throw ConfigError("schedule.epoch must be non-negative");
  if (bucket_granularity.seconds <= 0 || period.seconds % bucket_granularity.seconds != 0) {
    throw ConfigError("schedule.period must be a multiple of profile.bucket_granularity");
  }
}

std::optional<Timestamp> UpdateSchedule::tick_at_or_before(Timestamp t) const {
  if (t < epoch) return std::nullopt;
  const std::int64_t k = (t - epoch).seconds / period.seconds;
  return epoch + period * k;
}

EntityStats FeatureFrame::fallback() const {
  EntityStats stats;
  for (int w = 0; w < 2; ++w) {
    for (int d = 0; d < 2; ++d) {
      stats.fr[w][d] = overall[w][d];
      stats.woe[w][d] = 0.0;
    }
  }
  return stats;
}

FeatureFrame compute_feature_frame(Timestamp t_k, const ProfileStore& store,
                                   double smoothing_alpha) {
  if (store.watermark() < t_k) throw DataError("store not caught up");

  const ProfileSnapshot snaps[2] = {store.snapshot(t_k, Window::short_term),
                                    store.snapshot(t_k, Window::long_term)};

  FeatureFrame frame;
  frame.at = t_k;
  frame.warm_up = snaps[1].warm_up;
  for (int w = 0; w < 2; ++w) {
    for (int d = 0; d < 2; ++d) {
      frame.overall[w][d] = overall_fr(snaps[w].tables[0], kWeightings[d]);
    }
  }

  const auto& descriptors = store.descriptors();
  frame.entities.resize(descriptors.size());
  for (std::size_t desc = 0; desc < descriptors.size(); ++desc) {
    std::set<std::string> values;
    for (const auto& snap : snaps) {
      for (const auto& [value, cell] : snap.tables[desc].rows()) values.insert(value);
    }
    for (const auto& value : values) {
      EntityStats stats;
      for (int w = 0; w < 2; ++w) {
        for (int d = 0; d < 2; ++d) {
          stats.fr[w][d] = entity_fr(snaps[w].tables[desc], value, kWeightings[d]);
          stats.woe[w][d] = woe(snaps[w].tables[desc], value, kWeightings[d], smoothing_alpha);
        }
      }
      frame.entities[desc].emplace(value, stats);
    }
  }
  return frame;
}

void FrameSet::publish(FeatureFrame frame) {
  if (!frames_.empty() && frame.at <= frames_.back().at) {
    throw InternalError("frames must be published in increasing tick order");
  }
  frames_.push_back(std::move(frame));
}

const FeatureFrame* FrameSet::frame_for(Timestamp txn_time) const {
  auto it = std::upper_bound(frames_.begin(), frames_.end(), txn_time,
                             [](Timestamp t, const FeatureFrame& f) { return t < f.at; });
  if (it == frames_.begin()) return nullptr;
  return &*std::prev(it);
}

std::vector<std::string> dynamic_feature_names(std::span<const EntityDescriptor> descriptors) {
  std::vector<std::string> names;
  names.reserve(4 + 8 * descriptors.size());
  for (Window w : kWindows) {
    for (Weighting d : kWeightings) {
      names.push_back("fr_overall_" + to_string(w) + "_" + to_string(d));
    }
  }
  for (const auto& desc : descriptors) {
    for (const char* stat : {"fr", "woe"}) {
      for (Window w : kWindows) {
        for (Weighting d : kWeightings) {
          names.push_back(std::string(stat) + "_" + desc.name + "_" + to_string(w) + "_" +
                          to_string(d));
        }
      }
    }
  }
  return names;
}

std::vector<double> assemble_dynamic(const Transaction& txn, const FrameSet& frames,
                                     std::span<const EntityDescriptor> descriptors) {
  std::vector<double> out;
  out.reserve(4 + 8 * descriptors.size());
  const FeatureFrame* frame = frames.frame_for(txn.time);

  if (frame == nullptr) {
    // Warm-up: neutral values that do not fabricate risk.
    out.assign(4 + 8 * descriptors.size(), 0.0);
    return out;
  }

  for (int w = 0; w < 2; ++w) {
    for (int d = 0; d < 2; ++d) out.push_back(frame->overall[w][d]);
  }
  const EntityStats fallback = frame->fallback();
  for (std::size_t desc = 0; desc < descriptors.size(); ++desc) {
    const std::string value = extract_entity_value(txn, descriptors[desc]);
    auto it = frame->entities[desc].find(value);
    const EntityStats& stats = it == frame->entities[desc].end() ? fallback : it->second;
    for (int w = 0; w < 2; ++w) {
      for (int d = 0; d < 2; ++d) out.push_back(stats.fr[w][d]);
    }
    for (int w = 0; w < 2; ++w) {
      for (int d = 0; d < 2; ++d) out.push_back(stats.woe[w][d]);
    }
  }
  return out;
}

FrameSet build_frames(std::span<const Transaction> txns,
                      std::span<const FeedbackEvent> feedback, const WindowConfig& windows,
                      std::span<const EntityDescriptor> descriptors,
                      const FeedbackPolicy& policy, const UpdateSchedule& schedule,
                      double smoothing_alpha, Duration bucket_granularity) {
  schedule.validate(bucket_granularity);
  ProfileStore store(windows, {descriptors.begin(), descriptors.end()}, policy,
                     bucket_granularity);
  FrameSet frames;

  Timestamp next_tick = schedule.epoch;
  const auto publish_through = [&](Timestamp t) {
    while (next_tick <= t) {
      store.advance_to(next_tick);
      frames.publish(compute_feature_frame(next_tick, store, smoothing_alpha));
      next_tick = next_tick + schedule.period;
    }
  };

  for (const ReplayEvent& event : merge_stream(txns, feedback)) {
    publish_through(event.time);
    if (event.is_transaction()) {
      store.ingest(*event.transaction);
    } else {
      store.ingest(*event.feedback);
    }
  }
  return frames;
}

AssembledDataset assemble_dataset(std::span<const Transaction> txns,
                                  const std::unordered_map<std::int64_t, Verdict>& labels,
                                  const FrameSet& frames,
                                  std::span<const EntityDescriptor> descriptors) {
  AssembledDataset dataset;
  dataset.dynamic_names = dynamic_feature_names(descriptors);

  std::set<std::string> static_names;
  for (const auto& txn : txns) {
    for (const auto& [name, value] : txn.static_features) static_names.insert(name);
  }
  dataset.static_names.assign(static_names.begin(), static_names.end());

  dataset.rows.reserve(txns.size());
  for (const auto& txn : txns) {
    AssembledRow row;
    row.id = txn.id;
    row.time = txn.time;
    const FeatureFrame* frame = frames.frame_for(txn.time);
    row.warm_up = frame == nullptr || frame->warm_up;
    auto label_it = labels.find(txn.id);
    if (label_it == labels.end()) {
      throw DataError("no final label for transaction " + std::to_string(txn.id));
    }
    row.final_label = label_it->second;
    row.static_features = txn.static_features;
    row.dynamic_features = assemble_dynamic(txn, frames, descriptors);
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

AssembledDataset filter_rows(const AssembledDataset& dataset,
                             const std::function<bool(const AssembledRow&)>& keep) {
  AssembledDataset out;
  out.static_names = dataset.static_names;
  out.dynamic_names = dataset.dynamic_names;
  for (const auto& row : dataset.rows) {
    if (keep(row)) out.rows.push_back(row);
  }
  return out;
}

void write_frames_csv(const std::filesystem::path& path, const FrameSet& frames,
                      std::span<const EntityDescriptor> descriptors) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "t_k,entity,value,stat,window,weighting,value\n";
  for (const auto& frame : frames.frames()) {
    for (int w = 0; w < 2; ++w) {
      for (int d = 0; d < 2; ++d) {
        out << frame.at.seconds << ",,,fr," << to_string(kWindows[w]) << ','
            << to_string(kWeightings[d]) << ',' << double_text(frame.overall[w][d]) << '\n';
      }
    }
    for (std::size_t desc = 0; desc < frame.entities.size(); ++desc) {
      for (const auto& [value, stats] : frame.entities[desc]) {
        for (int w = 0; w < 2; ++w) {
          for (int d = 0; d < 2; ++d) {
            out << frame.at.seconds << ',' << descriptors[desc].name << ','
                << csv_escape(value) << ",fr," << to_string(kWindows[w]) << ','
                << to_string(kWeightings[d]) << ',' << double_text(stats.fr[w][d]) << '\n';
          }
        }
        for (int w = 0; w < 2; ++w) {
          for (int d = 0; d < 2; ++d) {
            out << frame.at.seconds << ',' << descriptors[desc].name << ','
                << csv_escape(value) << ",woe," << to_string(kWindows[w]) << ','
                << to_string(kWeightings[d]) << ',' << double_text(stats.woe[w][d]) << '\n';
          }
        }
      }
    }
  }
}

void write_dataset_csv(const std::filesystem::path& path, const AssembledDataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());

  out << "id,time,warm_up,label";
  for (const auto& name : dataset.static_names) out << ',' << csv_escape(name);
  for (const auto& name : dataset.dynamic_names) out << ',' << csv_escape(name);
  out << '\n';

  for (const auto& row : dataset.rows) {
    out << row.id << ',' << row.time.seconds << ',' << (row.warm_up ? 1 : 0) << ','
        << to_string(row.final_label);
    for (const auto& name : dataset.static_names) {
      out << ',';
      auto it = row.static_features.find(name);
      if (it == row.static_features.end()) continue;  // absent -> empty cell
      if (const auto* s = std::get_if<std::string>(&it->second)) {
        out << csv_escape(*s);
      } else {
        out << double_text(std::get<double>(it->second));
      }
    }
    for (double v : row.dynamic_features) out << ',' << double_text(v);
    out << '\n';
  }
}

AssembledDataset read_dataset_csv(const std::filesystem::path& path,
                                  std::size_t dynamic_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file " + path.string());

  auto header = split_csv_line(line);
  if (header.size() < 4 + dynamic_count || header[0] != "id" || header[1] != "time" ||
      header[2] != "warm_up" || header[3] != "label") {
    throw DataError("bad dataset header in " + path.string());
  }

  AssembledDataset dataset;
  const std::size_t static_count = header.size() - 4 - dynamic_count;
  dataset.static_names.assign(header.begin() + 4, header.begin() + 4 + static_count);
  dataset.dynamic_names.assign(header.begin() + 4 + static_count, header.end());

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw DataError("bad dataset row: " + line);
    AssembledRow row;
    row.id = std::stoll(fields[0]);
    row.time = {std::stoll(fields[1])};
    row.warm_up = fields[2] == "1";
    row.final_label = parse_verdict(fields[3]);
    for (std::size_t i = 0; i < static_count; ++i) {
      const std::string& cell = fields[4 + i];
      if (cell.empty()) continue;
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec == std::errc{} && ptr == cell.data() + cell.size()) {
        row.static_features[dataset.static_names[i]] = value;
      } else {
        row.static_features[dataset.static_names[i]] = cell;
      }
    }
    row.dynamic_features.reserve(dynamic_count);
    for (std::size_t i = 0; i < dynamic_count; ++i) {
      const std::string& cell = fields[4 + static_count + i];
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError("bad dynamic feature value: " + cell);
      }
      row.dynamic_features.push_back(value);
    }
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

}  // namespace riskstream
