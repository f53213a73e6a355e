// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "qgc/cli.hpp"
#include "qgc/error.hpp"
#include "qgc/eval.hpp"
#include "qgc/filtering.hpp"
#include "qgc/scoring.hpp"
#include "test_support.hpp"

namespace {

using namespace qgc;
using nlohmann::json;

// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    return failures_ == 0 ? "" : std::to_string(failures_) + " failure(s): " + notes_;
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::vector<Word> words_of(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += (i ? " w" : "w") + std::to_string(i);
  return segment_words(text);
}

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab = {"the",  "tower", "stands.", "Dr.", "keepers", "lived",
                                                 "there!", "why?", "granite", "(rock)", "e.g.", "sea"};
  std::string text;
  for (std::size_t i = 0; i < words; ++i) text += (i ? " " : "") + vocab[rng() % vocab.size()];
  return text;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

struct Outcome {
  std::string name;
  bool pass;
  double seconds;
  std::string detail;
};

Check budget_exactness() {
  Check c;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double taus[] = {0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 1000; ++i) {
    const auto words = segment_words(random_text(rng, 1 + rng() % 120));
    const double tau = taus[rng() % 4];
    const std::size_t L = words.size();
    std::vector<double> a2(L), a3(L);
    for (std::size_t w = 0; w < L; ++w) {
      a2[w] = unit(rng);
      a3[w] = unit(rng);
    }
    auto sentences = split_sentences(words);
    const std::size_t k = budget_words(L, tau);
    const auto phrase = phrase_filter(words, a3, tau).selected_word_indices;
    const auto sentence = sentence_filter(words, sentences, a2, tau).selected_word_indices;
    const auto dynamic = dynamic_filter(words, sentences, a2, a3, tau).selected_word_indices;
    const std::string tag = "case " + std::to_string(i);
    c.expect(phrase.size() == k, tag + " phrase kept " + std::to_string(phrase.size()));
    c.expect(dynamic.size() == k, tag + " dynamic kept " + std::to_string(dynamic.size()));
    c.expect(sentence.size() <= k, tag + " sentence kept " + std::to_string(sentence.size()));
    c.expect(k == std::min(L, std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(tau * L)))),
             tag + " budget arithmetic");
    if (tau == 1.0) {
      const auto all = iota(L);
      c.expect(phrase == all && sentence == all && dynamic == all, tag + " tau=1 not identity");
    }
  }
  return c;
}

Check oracle_equivalence() {
  Check c;
  std::mt19937_64 rng(2002);
  for (std::size_t L = 1; L <= 12; ++L) {
    const auto words = words_of(L);
    for (int v = 0; v < 200; ++v) {
      // Dyadic scores: sums are exact, and ties are frequent.
      std::vector<double> scores(L);
      for (double& s : scores) s = static_cast<double>(rng() % 8) / 16.0;
      for (std::size_t k = 1; k <= L; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(L);
        const auto got = phrase_filter(words, scores, tau).selected_word_indices;
        c.expect(got == oracles::best_subset(scores, k),
                 "L=" + std::to_string(L) + " k=" + std::to_string(k) + " vector " + std::to_string(v));
      }
    }
  }
  return c;
}

Check numerical_invariants() {
  Check c;
  std::mt19937_64 rng(3003);
  for (int i = 0; i < 500; ++i) {
    const auto rec = fixtures::random_record(rng);
    const auto a = renormalize_context(rec);
    double sum = 0.0;
    bool positive = true;
    for (double x : a) {
      sum += x;
      positive = positive && x > 0.0;
    }
    c.expect(std::abs(sum - 1.0) <= 1e-9, "renormalize sum " + std::to_string(sum));
    c.expect(positive, "renormalize not strictly positive");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng() % 60;
    const double sigma = 0.25 + 3.0 * unit(rng);
    const std::size_t radius = 1 + rng() % 10;
    std::vector<double> x(n);
    double mass = 0.0;
    for (double& v : x) mass += (v = unit(rng));
    const auto y = gaussian_smooth(x, sigma, radius);
    double out = 0.0;
    for (double v : y) out += v;
    c.expect(std::abs(out - mass) <= 1e-9, "smoothing mass drift " + std::to_string(out - mass));

    const double constant = unit(rng);
    for (double v : gaussian_smooth(std::vector<double>(n, constant), sigma, radius)) {
      c.expect(std::abs(v - constant) <= 1e-12, "constant array moved");
    }
  }
  const auto impulse = gaussian_smooth(std::vector<double>{0, 0, 0, 1, 0, 0, 0}, 1.0, 3);
  const double expected[] = {0.00443, 0.05400, 0.24204, 0.39906, 0.24204, 0.05400, 0.00443};
  for (std::size_t i = 0; i < 7; ++i) {
    c.expect(std::abs(impulse[i] - expected[i]) <= 1e-4, "impulse[" + std::to_string(i) + "]");
  }
  return c;
}

Check monotone_nesting() {
  Check c;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::size_t L = 1 + rng() % 200;
    std::vector<double> scores(L);
    for (double& s : scores) s = (rng() % 3 == 0) ? std::floor(unit(rng) * 4) : unit(rng);
    double t1 = 0.01 + 0.99 * unit(rng), t2 = 0.01 + 0.99 * unit(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto words = words_of(L);
    const auto small = phrase_filter(words, scores, t1).selected_word_indices;
    const auto large = phrase_filter(words, scores, t2).selected_word_indices;
    c.expect(std::includes(large.begin(), large.end(), small.begin(), small.end()),
             "case " + std::to_string(i) + " not nested");
  }
  return c;
}

int run_cli(std::vector<std::string> args, std::string& out, std::string& err) {
  args.insert(args.begin(), "qgc");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  out = o.str();
  err = e.str();
  return code;
}

Check reference_contract() {
  Check c;
  std::mt19937_64 rng(5005);
  const ReferenceModel model{ReferenceModelConfig{}};
  const ReferenceModel twin{ReferenceModelConfig{}};
  for (int i = 0; i < 30; ++i) {
    std::vector<std::uint32_t> ids(1 + rng() % 80);
    for (auto& id : ids) id = static_cast<std::uint32_t>(rng() % 4096);
    for (std::size_t p = 0; p < ids.size(); p += 1 + ids.size() / 7) {
      const auto row = model.attention_row(ids, p);
      double sum = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        c.expect(row[j] >= 0.0, "negative attention");
        if (j > p) c.expect(row[j] == 0.0, "attention to a future position");
        sum += row[j];
      }
      c.expect(std::abs(sum - 1.0) <= 1e-9, "row sum " + std::to_string(sum));
      c.expect(row == twin.attention_row(ids, p), "rows differ across runs");
    }
  }

  const auto input = (fixtures::data_dir() / "fixture_10docs.jsonl").string();
  for (const char* mode : {"phrase", "sentence", "dynamic"}) {
    for (const char* ratio : {"2", "4"}) {
      const std::string name = std::string("compress_") + mode + "_" + ratio + "x.jsonl";
      const auto golden_path = fixtures::data_dir() / "golden" / name;
      std::string out, err;
      const int code = run_cli({"compress", "--input", input, "--ratio", ratio, "--mode", mode,
                                "--provider", "ref", "--seed", "7"},
                               out, err);
      c.expect(code == 0, name + " exit " + std::to_string(code) + " " + err);
      if (!std::filesystem::exists(golden_path)) {
        c.expect(false, name + " golden missing");
        continue;
      }
      c.expect(out == fixtures::read_file(golden_path), name + " differs from golden");
    }
  }
  return c;
}

Check metrics() {
  Check c;
  c.expect(rouge_l("the cat sat", "the cat sat on mat") == 0.75, "rouge_l example");
  c.expect(rouge_l("the cat sat", "the cat sat") == 1.0, "rouge_l identity");
  c.expect(rouge_l("a b", "c d") == 0.0, "rouge_l disjoint");
  c.expect(accuracy_contains("The capital is Paris.", {"paris"}) == 1, "accuracy case 1");
  c.expect(accuracy_contains("I don't know", {"paris"}) == 0, "accuracy case 2");
  c.expect(accuracy_contains("new  york city", {"New York"}) == 1, "accuracy case 3");
  const std::vector<std::vector<std::string>> sets = {{"paris"}, {"rome"}, {"oslo"}, {"lima"}};
  c.expect(em_recall("paris or rome", sets) == 0.5, "em_recall 2 of 4");
  c.expect(em_recall("lima oslo rome paris", sets) == 1.0, "em_recall all");
  c.expect(em_recall("", sets) == 0.0, "em_recall empty");
  return c;
}

Check position_sweep_criterion() {
  Check c;
  const auto records = load_dataset(fixtures::data_dir() / "sweep_20docs.jsonl");
  c.expect(records.size() == 1 && records[0].documents.size() == 20, "fixture shape");
  if (!c.ok()) return c;
  const auto& rec = records[0];
  std::multiset<std::string> bag;
  for (const auto& d : rec.documents) bag.insert(d.id + "\x1f" + d.text);
  std::set<std::vector<std::string>> distinct;
  for (std::size_t p : {1, 5, 10, 15, 20}) {
    const auto moved = position_sweep(rec, p);
    std::multiset<std::string> got;
    std::vector<std::string> order;
    for (const auto& d : moved.documents) {
      got.insert(d.id + "\x1f" + d.text);
      order.push_back(d.id);
    }
    c.expect(got == bag, "multiset changed at position " + std::to_string(p));
    c.expect(moved.documents[p - 1].is_gold.value_or(false), "gold not at rank " + std::to_string(p));
    distinct.insert(order);
  }
  c.expect(distinct.size() == 5, "expected 5 distinct permutations");
  return c;
}

Check interchange_robustness() {
  Check c;
  fixtures::TempDir dir;
  std::mt19937_64 rng(8008);
  int rejected = 0, variants = 0;
  for (int i = 0; i < 100; ++i) {
    const auto rec = fixtures::random_record(rng);
    const auto path = dir / "valid.json";
    save_attention_record(rec, path);
    try {
      const auto back = load_attention_record(path);
      bool same = back.trigger_attention == rec.trigger_attention && back.context_tokens == rec.context_tokens &&
                  back.prompt_sha256 == rec.prompt_sha256 && back.provider_id == rec.provider_id &&
                  back.layer_policy == rec.layer_policy && back.tokens.size() == rec.tokens.size();
      for (std::size_t t = 0; same && t < rec.tokens.size(); ++t) {
        same = back.tokens[t].surface == rec.tokens[t].surface &&
               back.tokens[t].char_start == rec.tokens[t].char_start &&
               back.tokens[t].char_end == rec.tokens[t].char_end;
      }
      c.expect(same, "round trip " + std::to_string(i) + " lossy");
    } catch (const Error& e) {
      c.expect(false, std::string("valid record rejected: ") + e.what());
    }

    for (const auto& [label, text] : fixtures::fuzz_variants(rec, rng)) {
      ++variants;
      const auto bad = dir / "bad.json";
      fixtures::write_file(bad, text);
      try {
        load_attention_record(bad);
        c.expect(false, "accepted fuzz variant: " + label);
      } catch (const Error& e) {
        ++rejected;
        c.expect(std::string(e.what()).size() > 10, "empty diagnostic for " + label);
      }
    }
  }
  c.expect(rejected == variants, std::to_string(rejected) + "/" + std::to_string(variants) + " rejected");
  return c;
}

Check end_to_end() {
  Check c;
  fixtures::EchoServer server;
  fixtures::TempDir dir;
  const auto input = (fixtures::data_dir() / "e2e_20records.jsonl").string();
  std::string reports[2];
  for (int pass = 0; pass < 2; ++pass) {
    const auto compressed = (dir / ("compressed" + std::to_string(pass) + ".jsonl")).string();
    const auto preds = (dir / ("preds" + std::to_string(pass) + ".jsonl")).string();
    std::string out, err;
    int code = run_cli({"compress", "--input", input, "--output", compressed, "--ratio", "2", "--mode", "dynamic"}, out, err);
    c.expect(code == 0, "compress exit " + std::to_string(code) + " " + err);
    code = run_cli({"generate", "--input", compressed, "--output", preds, "--endpoint", server.url(), "--model", "mock",
                    "--max-in-flight", "4", "--jobs", "4"},
                   out, err);
    c.expect(code == 0, "generate exit " + std::to_string(code) + " " + err);
    code = run_cli({"eval", "--pred", preds, "--gold", input}, reports[pass], err);
    c.expect(code == 0, "eval exit " + std::to_string(code) + " " + err);
  }
  c.expect(!reports[0].empty() && reports[0] == reports[1], "reports differ between runs");
  if (c.ok()) {
    const auto report = json::parse(reports[0]);
    c.expect(report["n"] == 20, "report n");
    c.expect(report.contains("accuracy") && report.contains("rouge_l") && report.contains("em_recall"),
             "report metrics");
  }
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    double limit_seconds;  // 0 means no runtime bound
    std::function<Check()> body;
  };
  const std::vector<Criterion> criteria = {
      {"1 budget exactness (1000 cases)", 10.0, budget_exactness},
      {"2 oracle equivalence (L<=12, 200 vectors)", 30.0, oracle_equivalence},
      {"3 numerical invariants", 0.0, numerical_invariants},
      {"4 monotone nesting (500 cases)", 0.0, monotone_nesting},
      {"5 reference provider contract and goldens", 0.0, reference_contract},
      {"6 metrics", 0.0, metrics},
      {"7 position sweep", 0.0, position_sweep_criterion},
      {"8 interchange robustness", 0.0, interchange_robustness},
      {"9 end-to-end with mock generator", 5.0, end_to_end},
  };

  int failed = 0;
  for (const auto& crit : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = crit.body();
    } catch (const std::exception& e) {
      check.expect(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (crit.limit_seconds > 0 && seconds >= crit.limit_seconds) {
      check.expect(false, "took " + std::to_string(seconds) + " s, limit " + std::to_string(crit.limit_seconds) + " s");
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", seconds);
    std::cout << (check.ok() ? "PASS " : "FAIL ") << crit.name << " [" << timing << "]";
    if (!check.ok()) std::cout << " " << check.summary();
    std::cout << '\n';
    if (!check.ok()) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
