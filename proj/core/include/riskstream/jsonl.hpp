#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskstream/domain.hpp"

namespace riskstream {

// JSON Lines wire format: one object per line.
// Transactions use exactly the fields  id, time, amount, features.
// Feedback uses exactly              transaction_id, kind, arrival_time, verdict.

std::string transaction_to_json(const Transaction& txn);
Transaction transaction_from_json(const std::string& line);

std::string feedback_to_json(const FeedbackEvent& event);
FeedbackEvent feedback_from_json(const std::string& line);

void write_transactions_jsonl(const std::filesystem::path& path,
                              std::span<const Transaction> txns);
std::vector<Transaction> read_transactions_jsonl(const std::filesystem::path& path);

void write_feedback_jsonl(const std::filesystem::path& path,
                          std::span<const FeedbackEvent> events);
std::vector<FeedbackEvent> read_feedback_jsonl(const std::filesystem::path& path);

// Ground-truth manifest: CSV `id,final_label`, one row per transaction in
// stream order.
void write_ground_truth_csv(const std::filesystem::path& path,
                            std::span<const Transaction> txns,
                            const std::unordered_map<std::int64_t, Verdict>& labels);
std::unordered_map<std::int64_t, Verdict> read_ground_truth_csv(
    const std::filesystem::path& path);

}  // namespace riskstream
