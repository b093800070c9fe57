#include "riskstream/jsonl.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "riskstream/errors.hpp"

namespace riskstream {

using json = nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string transaction_to_json(const Transaction& txn) {
  json features = json::object();
  for (const auto& [name, value] : txn.static_features) {
    if (const auto* s = std::get_if<std::string>(&value)) {
      features[name] = *s;
    } else {
      features[name] = std::get<double>(value);
    }
  }
  json obj = {{"id", txn.id},
              {"time", txn.time.seconds},
              {"amount", txn.amount.cents},
              {"features", std::move(features)}};
  return obj.dump();
}

Transaction transaction_from_json(const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) throw DataError("bad transaction JSON: " + line);
  try {
    Transaction txn;
    txn.id = obj.at("id").get<std::int64_t>();
    txn.time = {obj.at("time").get<std::int64_t>()};
    txn.amount = {obj.at("amount").get<std::int64_t>()};
    if (txn.amount.cents < 0) throw DataError("negative amount in transaction");
    for (const auto& [name, value] : obj.at("features").items()) {
      if (value.is_string()) {
        txn.static_features[name] = value.get<std::string>();
      } else if (value.is_number()) {
        txn.static_features[name] = value.get<double>();
      } else {
        throw DataError("feature " + name + " is neither text nor number");
      }
    }
    return txn;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad transaction JSON: ") + e.what());
  }
}

std::string feedback_to_json(const FeedbackEvent& event) {
  json obj = {{"transaction_id", event.transaction_id},
              {"kind", to_string(event.kind)},
              {"arrival_time", event.arrival_time.seconds},
              {"verdict", to_string(event.verdict)}};
  return obj.dump();
}

FeedbackEvent feedback_from_json(const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) throw DataError("bad feedback JSON: " + line);
  try {
    FeedbackEvent event;
    event.transaction_id = obj.at("transaction_id").get<std::int64_t>();
    event.kind = parse_feedback_kind(obj.at("kind").get<std::string>());
    event.arrival_time = {obj.at("arrival_time").get<std::int64_t>()};
    event.verdict = parse_verdict(obj.at("verdict").get<std::string>());
    return event;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad feedback JSON: ") + e.what());
  }
}

void write_transactions_jsonl(const std::filesystem::path& path,
                              std::span<const Transaction> txns) {
  auto out = open_output(path);
  for (const auto& txn : txns) out << transaction_to_json(txn) << '\n';
}

std::vector<Transaction> read_transactions_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Transaction> txns;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) txns.push_back(transaction_from_json(line));
  }
  return txns;
}

void write_feedback_jsonl(const std::filesystem::path& path,
                          std::span<const FeedbackEvent> events) {
  auto out = open_output(path);
  for (const auto& event : events) out << feedback_to_json(event) << '\n';
}

std::vector<FeedbackEvent> read_feedback_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<FeedbackEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) events.push_back(feedback_from_json(line));
  }
  return events;
}

void write_ground_truth_csv(const std::filesystem::path& path,
                            std::span<const Transaction> txns,
                            const std::unordered_map<std::int64_t, Verdict>& labels) {
  auto out = open_output(path);
  out << "id,final_label\n";
  for (const auto& txn : txns) {
    auto it = labels.find(txn.id);
    if (it == labels.end()) throw DataError("no final label for transaction " + std::to_string(txn.id));
    out << txn.id << ',' << to_string(it->second) << '\n';
  }
}

std::unordered_map<std::int64_t, Verdict> read_ground_truth_csv(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  std::unordered_map<std::int64_t, Verdict> labels;
  std::string line;
  if (!std::getline(in, line) || line != "id,final_label") {
    throw DataError("bad ground truth header in " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("bad ground truth row: " + line);
    labels[std::stoll(line.substr(0, comma))] = parse_verdict(line.substr(comma + 1));
  }
  return labels;
}

}  // namespace riskstream
