#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qgc/text.hpp"

namespace qgc {

struct DatasetRecord {
  std::string id;
  std::string query;
  std::optional<std::string> instruction;
  std::vector<std::string> answers;
  std::optional<std::vector<std::vector<std::string>>> qa_pairs;
  std::vector<Document> documents;
  std::optional<std::string> long_answer;
  nlohmann::json raw;  // the input object, unknown fields included
};

/// Throws Validation naming `line` (1-based) on schema violations.
DatasetRecord parse_dataset_record(const nlohmann::json& j, std::size_t line);
nlohmann::json documents_to_json(const std::vector<Document>& docs);

/// JSONL, one record per non-blank line.
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

/// Calls `fn(json, line)` for each non-blank line of a JSONL file.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn);

/// ASCII lowercase, whitespace runs collapsed to one space, trimmed.
std::string normalize_answer(std::string_view text);

/// 1 iff some normalized answer is a substring of the normalized prediction.
int accuracy_contains(std::string_view prediction, const std::vector<std::string>& answers);

struct RougeL {
  std::size_t lcs = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Word-level LCS over lowercased whitespace-segmented words; balanced F1.
RougeL rouge_l_scores(std::string_view prediction, std::string_view reference);
double rouge_l(std::string_view prediction, std::string_view reference);

/// Fraction of answer sets with at least one member contained in the prediction.
double em_recall(std::string_view prediction, const std::vector<std::vector<std::string>>& qa_pairs);

/// Moves the single gold document to 1-based `position`, others keep their order.
DatasetRecord position_sweep(const DatasetRecord& record, std::size_t position);

struct MetricSelection {
  bool accuracy = true;
  bool rouge_l = true;
  bool em_recall = true;

  static MetricSelection parse(std::string_view csv);
};

struct Prediction {
  std::optional<std::string> id;
  std::string text;
};

std::vector<Prediction> load_predictions(const std::filesystem::path& path);

/// {"n", selected metric means, "per_record": [...]}. Throws Validation on
/// count/id mismatch or missing gold fields for a selected metric.
nlohmann::json evaluate(const std::vector<Prediction>& predictions,
                        const std::vector<DatasetRecord>& gold, const MetricSelection& metrics);

}  // namespace qgc

#include "qgc/detail/jsonl.ipp"
