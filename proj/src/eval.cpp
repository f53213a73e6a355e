#include "qgc/eval.hpp"

#include <algorithm>

#include "qgc/error.hpp"

namespace qgc {

using nlohmann::json;

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": " + why);
}

std::string get_string(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) bad_line(line, std::string("missing \"") + key + "\"");
  if (!it->is_string()) bad_line(line, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::optional<std::string> get_optional_string(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad_line(line, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::vector<std::string> get_string_array(const json& j, const char* what, std::size_t line) {
  if (!j.is_array()) bad_line(line, std::string("\"") + what + "\" must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) bad_line(line, std::string("\"") + what + "\" must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

DatasetRecord parse_dataset_record(const json& j, std::size_t line) {
  if (!j.is_object()) bad_line(line, "record must be a JSON object");
  DatasetRecord r;
  r.raw = j;
  r.query = get_string(j, "query", line);
  r.id = get_optional_string(j, "id", line).value_or(std::to_string(line));
  r.instruction = get_optional_string(j, "instruction", line);
  r.long_answer = get_optional_string(j, "long_answer", line);
  if (auto it = j.find("answers"); it != j.end() && !it->is_null()) {
    r.answers = get_string_array(*it, "answers", line);
  }
  if (auto it = j.find("qa_pairs"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) bad_line(line, "\"qa_pairs\" must be an array of string arrays");
    std::vector<std::vector<std::string>> sets;
    for (const auto& s : *it) sets.push_back(get_string_array(s, "qa_pairs", line));
    r.qa_pairs = std::move(sets);
  }

  const auto docs = j.find("documents");
  if (docs == j.end()) bad_line(line, "missing \"documents\"");
  if (!docs->is_array() || docs->empty()) bad_line(line, "\"documents\" must be a non-empty array");
  for (std::size_t i = 0; i < docs->size(); ++i) {
    const json& d = (*docs)[i];
    if (!d.is_object()) bad_line(line, "document " + std::to_string(i) + " must be an object");
    std::optional<bool> gold;
    if (auto g = d.find("is_gold"); g != d.end() && !g->is_null()) {
      if (!g->is_boolean()) bad_line(line, "\"is_gold\" must be a boolean");
      gold = g->get<bool>();
    }
    r.documents.push_back(Document::from_text(
        get_optional_string(d, "id", line).value_or(std::to_string(i)), get_string(d, "text", line),
        get_optional_string(d, "title", line), gold));
  }
  return r;
}

json documents_to_json(const std::vector<Document>& docs) {
  json out = json::array();
  for (const auto& d : docs) {
    json o{{"id", d.id}, {"text", d.text}};
    if (d.title) o["title"] = *d.title;
    if (d.is_gold) o["is_gold"] = *d.is_gold;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::vector<DatasetRecord> records;
  try {
    for_each_jsonl(path, [&](const json& j, std::size_t line) {
      records.push_back(parse_dataset_record(j, line));
    });
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with(path.string())) throw;
    throw e.with_context(path.string());
  }
  return records;
}

std::string normalize_answer(std::string_view text) {
  const std::string lower = ascii_lower(text);
  std::string out;
  for (const Word& w : segment_words(lower)) {
    if (!out.empty()) out.push_back(' ');
    out += w.surface;
  }
  return out;
}

int accuracy_contains(std::string_view prediction, const std::vector<std::string>& answers) {
  const std::string pred = normalize_answer(prediction);
  for (const auto& a : answers) {
    if (pred.find(normalize_answer(a)) != std::string::npos) return 1;
  }
  return 0;
}

RougeL rouge_l_scores(std::string_view prediction, std::string_view reference) {
  const auto pred = segment_words(ascii_lower(prediction));
  const auto ref = segment_words(ascii_lower(reference));
  RougeL out;
  if (pred.empty() || ref.empty()) return out;

  std::vector<std::size_t> prev(ref.size() + 1, 0);
  std::vector<std::size_t> cur(ref.size() + 1, 0);
  for (const auto& p : pred) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = p.surface == ref[j - 1].surface ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  out.lcs = prev[ref.size()];
  if (out.lcs == 0) return out;
  out.precision = static_cast<double>(out.lcs) / static_cast<double>(pred.size());
  out.recall = static_cast<double>(out.lcs) / static_cast<double>(ref.size());
  // 2PR / (P + R) reduces to 2 LCS / (|pred| + |ref|), one rounding instead of four.
  out.f1 = 2.0 * static_cast<double>(out.lcs) / static_cast<double>(pred.size() + ref.size());
  return out;
}

double rouge_l(std::string_view prediction, std::string_view reference) {
  return rouge_l_scores(prediction, reference).f1;
}

double em_recall(std::string_view prediction, const std::vector<std::vector<std::string>>& qa_pairs) {
  if (qa_pairs.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& set : qa_pairs) hit += static_cast<std::size_t>(accuracy_contains(prediction, set));
  return static_cast<double>(hit) / static_cast<double>(qa_pairs.size());
}

DatasetRecord position_sweep(const DatasetRecord& record, std::size_t position) {
  std::vector<std::size_t> gold;
  for (std::size_t i = 0; i < record.documents.size(); ++i) {
    if (record.documents[i].is_gold.value_or(false)) gold.push_back(i);
  }
  if (gold.size() != 1) {
    throw Error(ErrorKind::Validation, "record '" + record.id + "' has " + std::to_string(gold.size()) +
                                           " gold documents, expected exactly one");
  }
  const std::size_t n = record.documents.size();
  if (position < 1 || position > n) {
    throw Error(ErrorKind::Config, "position " + std::to_string(position) + " outside [1, " +
                                       std::to_string(n) + "]");
  }
  DatasetRecord out = record;
  Document g = std::move(out.documents[gold[0]]);
  out.documents.erase(out.documents.begin() + static_cast<std::ptrdiff_t>(gold[0]));
  out.documents.insert(out.documents.begin() + static_cast<std::ptrdiff_t>(position - 1), std::move(g));
  out.raw["documents"] = documents_to_json(out.documents);
  return out;
}

MetricSelection MetricSelection::parse(std::string_view csv) {
  MetricSelection sel{false, false, false};
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = std::min(csv.find(',', start), csv.size());
    const auto name = csv.substr(start, comma - start);
    if (name == "accuracy") sel.accuracy = true;
    else if (name == "rouge_l") sel.rouge_l = true;
    else if (name == "em_recall") sel.em_recall = true;
    else throw Error(ErrorKind::Config, "unknown metric '" + std::string(name) + "'");
    start = comma + 1;
  }
  return sel;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> preds;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    if (!j.is_object()) bad_line(line, "prediction must be a JSON object");
    Prediction p;
    p.id = get_optional_string(j, "id", line);
    p.text = get_string(j, "prediction", line);
    preds.push_back(std::move(p));
  });
  return preds;
}

json evaluate(const std::vector<Prediction>& predictions, const std::vector<DatasetRecord>& gold,
              const MetricSelection& metrics) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorKind::Validation, "prediction count " + std::to_string(predictions.size()) +
                                           " does not match gold count " + std::to_string(gold.size()));
  }
  double acc_sum = 0.0;
  double rouge_sum = 0.0;
  double em_sum = 0.0;
  json per_record = json::array();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& p = predictions[i];
    if (p.id && *p.id != g.id) {
      throw Error(ErrorKind::Validation, "prediction " + std::to_string(i + 1) + " has id '" + *p.id +
                                             "' but gold record has id '" + g.id + "'");
    }
    json row{{"id", g.id}};
    if (metrics.accuracy) {
      if (g.answers.empty()) throw Error(ErrorKind::Validation, "record '" + g.id + "' has no answers");
      const int a = accuracy_contains(p.text, g.answers);
      acc_sum += a;
      row["accuracy"] = a;
    }
    if (metrics.rouge_l) {
      if (!g.long_answer) throw Error(ErrorKind::Validation, "record '" + g.id + "' has no long_answer");
      const double r = rouge_l(p.text, *g.long_answer);
      rouge_sum += r;
      row["rouge_l"] = r;
    }
    if (metrics.em_recall) {
      if (!g.qa_pairs || g.qa_pairs->empty()) {
        throw Error(ErrorKind::Validation, "record '" + g.id + "' has no qa_pairs");
      }
      const double e = em_recall(p.text, *g.qa_pairs);
      em_sum += e;
      row["em_recall"] = e;
    }
    per_record.push_back(std::move(row));
  }
  const double n = gold.empty() ? 1.0 : static_cast<double>(gold.size());
  json report{{"n", gold.size()}, {"per_record", std::move(per_record)}};
  if (metrics.accuracy) report["accuracy"] = acc_sum / n;
  if (metrics.rouge_l) report["rouge_l"] = rouge_sum / n;
  if (metrics.em_recall) report["em_recall"] = em_sum / n;
  return report;
}

}  // namespace qgc
