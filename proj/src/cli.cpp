#include "qgc/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include "qgc/attention.hpp"
#include "qgc/config.hpp"
#include "qgc/error.hpp"
#include "qgc/eval.hpp"
#include "qgc/generation.hpp"
#include "qgc/parallel.hpp"
#include "qgc/pipeline.hpp"

namespace qgc::cli {

using nlohmann::json;

namespace {

const std::vector<std::string_view> kConfigKeys = {
    "template", "instruction", "provider", "ratio", "mode", "scope", "sigma", "radius",
    "seed", "vocab_size", "embed_dim", "head_count", "jobs",
    "generation.endpoint", "generation.model", "generation.max_tokens",
    "generation.temperature", "generation.timeout_ms", "generation.max_in_flight",
    "generation.api_key_env", "generation.retries", "generation.backoff_ms"};

// Flags shared by subcommands that build prompts.
struct PromptFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> template_path;
  std::optional<std::string> instruction;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "Flat key = value config file");
    app.add_option("--template", template_path, "File holding the prompt template ({s}, {c}, {q})");
    app.add_option("--instruction", instruction, "Instruction used when a record has none");
  }

  FlatConfig config() const {
    FlatConfig cfg = config_path ? FlatConfig::load(*config_path) : FlatConfig{};
    cfg.require_known(kConfigKeys);
    return cfg;
  }

  PromptTemplate prompt_template(const FlatConfig& cfg) const {
    if (template_path) {
      std::ifstream in(*template_path, std::ios::binary);
      if (!in) throw Error(ErrorKind::Config, "cannot open template '" + *template_path + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      std::string body = ss.str();
      if (body.ends_with("\r\n")) body.resize(body.size() - 2);
      else if (body.ends_with('\n')) body.pop_back();
      return PromptTemplate::parse(std::move(body));
    }
    if (auto t = cfg.get("template")) return PromptTemplate::parse(*t);
    return PromptTemplate::default_chat();
  }

  std::string default_instruction(const FlatConfig& cfg) const {
    if (instruction) return *instruction;
    return cfg.get("instruction").value_or(kDefaultInstruction);
  }
};

template <typename T>
T pick(const std::optional<T>& flag, std::optional<T> from_config, T fallback) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  return fallback;
}

class Output {
 public:
  explicit Output(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Validation, "cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::vector<DatasetRecord> read_records(const std::string& path) {
  return load_dataset(path);
}

// ---------------------------------------------------------------------------

struct CompressFlags {
  std::string input;
  std::string output = "-";
  std::optional<double> ratio;
  std::optional<std::string> mode;
  std::optional<std::string> scope;
  std::optional<std::string> provider;
  std::optional<double> sigma;
  std::optional<std::uint64_t> radius;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> vocab_size;
  std::optional<std::uint64_t> embed_dim;
  std::optional<std::uint64_t> head_count;
  std::optional<std::uint64_t> jobs;
  bool trace = false;
  PromptFlags prompt;
};

ReferenceModelConfig reference_config(const CompressFlags& f, const FlatConfig& cfg) {
  ReferenceModelConfig rc;
  rc.seed = pick(f.seed, cfg.get_uint("seed"), rc.seed);
  rc.vocab_size = pick(f.vocab_size, cfg.get_uint("vocab_size"), std::uint64_t{rc.vocab_size});
  rc.embed_dim = pick(f.embed_dim, cfg.get_uint("embed_dim"), std::uint64_t{rc.embed_dim});
  rc.head_count = pick(f.head_count, cfg.get_uint("head_count"), std::uint64_t{rc.head_count});
  rc.validate();
  return rc;
}

json compressed_to_json(const CompressedDocument& d, bool trace) {
  json o{{"id", d.document_id},
         {"text", d.compressed.rendered},
         {"kept_words", d.compressed.selected_word_indices.size()},
         {"source_words", d.source_words}};
  if (trace) {
    json sentences = json::array();
    for (const auto& s : d.sentences) sentences.push_back({s.word_start, s.word_end, s.score});
    o["trace"] = {{"alpha2", d.alpha2},
                  {"alpha3", d.alpha3},
                  {"selected", d.selected},
                  {"sentences", std::move(sentences)},
                  {"provider_id", d.provider_id}};
  }
  return o;
}

int do_compress(const CompressFlags& f, std::ostream& out) {
  const FlatConfig cfg = f.prompt.config();
  const double ratio = pick(f.ratio, cfg.get_double("ratio"), 2.0);
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
    throw Error(ErrorKind::Config, "--ratio must be >= 1 (kept fraction is 1 / ratio)");
  }
  CompressionConfig config;
  config.tau = 1.0 / ratio;
  config.mode = parse_filter_mode(pick(f.mode, cfg.get("mode"), std::string("phrase")));
  config.scope = parse_budget_scope(pick(f.scope, cfg.get("scope"), std::string("per-doc")));
  config.smoothing.sigma = pick(f.sigma, cfg.get_double("sigma"), 1.0);
  config.smoothing.radius = pick(f.radius, cfg.get_uint("radius"), std::uint64_t{3});
  config.prompt_template = f.prompt.prompt_template(cfg);
  config.validate();

  const auto provider = make_provider(pick(f.provider, cfg.get("provider"), std::string("ref")),
                                      reference_config(f, cfg));
  const std::string instruction = f.prompt.default_instruction(cfg);
  const auto jobs = pick(f.jobs, cfg.get_uint("jobs"), std::uint64_t{1});

  const auto records = read_records(f.input);
  std::vector<std::string> lines(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = records[i];
    try {
      const auto compressed = compress_context(r.documents, r.query, r.instruction.value_or(instruction),
                                               config, *provider);
      json rec = r.raw;
      json docs = json::array();
      for (const auto& d : compressed) docs.push_back(compressed_to_json(d, f.trace));
      rec["compressed_documents"] = std::move(docs);
      lines[i] = rec.dump();
    } catch (const Error& e) {
      throw e.with_context("record '" + r.id + "'");
    }
  });

  Output sink(f.output, out);
  for (const auto& line : lines) sink.stream() << line << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalFlags {
  std::string pred;
  std::string gold;
  std::string metrics = "accuracy,rouge_l,em_recall";
  std::string output = "-";
};

int do_eval(const EvalFlags& f, std::ostream& out) {
  const auto selection = MetricSelection::parse(f.metrics);
  const auto report = evaluate(load_predictions(f.pred), read_records(f.gold), selection);
  Output sink(f.output, out);
  sink.stream() << report.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepFlags {
  std::string input;
  std::string output = "-";
  std::vector<std::size_t> positions = {1, 5, 10, 15, 20};
};

int do_sweep(const SweepFlags& f, std::ostream& out) {
  const auto records = read_records(f.input);
  Output sink(f.output, out);
  std::ostringstream buffer;
  for (const auto& r : records) {
    for (std::size_t p : f.positions) {
      auto moved = position_sweep(r, p);
      json rec = moved.raw;
      rec["id"] = r.id + "@" + std::to_string(p);
      rec["gold_position"] = p;
      buffer << rec.dump() << '\n';
    }
  }
  sink.stream() << buffer.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenerateFlags {
  std::string input;
  std::string output = "-";
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<double> temperature;
  std::optional<std::uint64_t> max_tokens;
  std::optional<std::uint64_t> timeout_ms;
  std::optional<std::uint64_t> max_in_flight;
  std::optional<std::uint64_t> retries;
  std::optional<std::uint64_t> backoff_ms;
  std::optional<std::string> api_key_env;
  std::optional<std::uint64_t> jobs;
  PromptFlags prompt;
};

// Compressed documents when present, else the originals, one per line.
std::string context_for(const DatasetRecord& r) {
  std::string context;
  auto append = [&](const std::string& text) {
    if (!context.empty()) context += '\n';
    context += text;
  };
  if (auto it = r.raw.find("compressed_documents"); it != r.raw.end() && it->is_array()) {
    for (const auto& d : *it) append(d.value("text", std::string()));
  } else {
    for (const auto& d : r.documents) append(d.text);
  }
  return context;
}

int do_generate(const GenerateFlags& f, std::ostream& out) {
  const FlatConfig cfg = f.prompt.config();
  const PromptTemplate tmpl = f.prompt.prompt_template(cfg);
  const std::string instruction = f.prompt.default_instruction(cfg);

  GenerationRequest base;
  base.endpoint = pick(f.endpoint, cfg.get("generation.endpoint"), std::string());
  if (base.endpoint.empty()) throw Error(ErrorKind::Config, "--endpoint is required");
  base.model = pick(f.model, cfg.get("generation.model"), std::string("default"));
  base.temperature = pick(f.temperature, cfg.get_double("generation.temperature"), 0.0);
  base.max_tokens = static_cast<int>(pick(f.max_tokens, cfg.get_uint("generation.max_tokens"), std::uint64_t{256}));
  base.timeout = std::chrono::milliseconds(pick(f.timeout_ms, cfg.get_uint("generation.timeout_ms"), std::uint64_t{60000}));
  const auto key_env = pick(f.api_key_env, cfg.get("generation.api_key_env"), std::string("OPENAI_API_KEY"));
  if (const char* key = std::getenv(key_env.c_str()); key != nullptr && *key != '\0') base.bearer_token = key;
  base.validate();

  RetryPolicy retry;
  retry.max_attempts = static_cast<int>(pick(f.retries, cfg.get_uint("generation.retries"), std::uint64_t{3}));
  retry.initial_backoff = std::chrono::milliseconds(pick(f.backoff_ms, cfg.get_uint("generation.backoff_ms"), std::uint64_t{500}));
  GenerationClient client(retry, pick(f.max_in_flight, cfg.get_uint("generation.max_in_flight"), std::uint64_t{4}));

  const auto records = read_records(f.input);
  std::vector<std::string> lines(records.size());
  parallel_for(records.size(), pick(f.jobs, cfg.get_uint("jobs"), std::uint64_t{1}), [&](std::size_t i) {
    const auto& r = records[i];
    GenerationRequest req = base;
    req.prompt = fill_template(r.instruction.value_or(instruction), context_for(r), r.query, tmpl).text;
    try {
      lines[i] = json{{"id", r.id}, {"prediction", client.generate(req)}}.dump();
    } catch (const Error& e) {
      throw e.with_context("record '" + r.id + "'");
    }
  });

  Output sink(f.output, out);
  for (const auto& line : lines) sink.stream() << line << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PromptsFlags {
  std::string input;
  std::string output = "-";
  PromptFlags prompt;
};

int do_prompts(const PromptsFlags& f, std::ostream& out) {
  const FlatConfig cfg = f.prompt.config();
  const PromptTemplate tmpl = f.prompt.prompt_template(cfg);
  const std::string instruction = f.prompt.default_instruction(cfg);
  std::ostringstream buffer;
  for (const auto& r : read_records(f.input)) {
    for (const auto& d : r.documents) {
      const auto p = fill_template(r.instruction.value_or(instruction), d.text, r.query, tmpl);
      buffer << json{{"record_id", r.id},
                     {"document_id", d.id},
                     {"prompt", p.text},
                     {"prompt_sha256", sha256_hex(p.text)},
                     {"context_char_span", {p.context_char_span.start, p.context_char_span.end}}}
                    .dump()
             << '\n';
    }
  }
  Output sink(f.output, out);
  sink.stream() << buffer.str();
  return kExitOk;
}

struct RecordFlags {
  std::string input;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  PromptFlags prompt;
};

int do_record(const RecordFlags& f, std::ostream& out) {
  const FlatConfig cfg = f.prompt.config();
  const PromptTemplate tmpl = f.prompt.prompt_template(cfg);
  const std::string instruction = f.prompt.default_instruction(cfg);
  CompressFlags cf;
  cf.seed = f.seed;
  ReferenceProvider provider(reference_config(cf, cfg));
  std::filesystem::create_directories(f.output_dir);
  std::size_t written = 0;
  for (const auto& r : read_records(f.input)) {
    for (const auto& d : r.documents) {
      const auto p = fill_template(r.instruction.value_or(instruction), d.text, r.query, tmpl);
      save_attention_record(provider.request(p),
                            std::filesystem::path(f.output_dir) / (sha256_hex(p.text) + ".json"));
      ++written;
    }
  }
  out << "wrote " << written << " attention records to " << f.output_dir << '\n';
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Provider:
    case ErrorKind::Timeout:
      return kExitProvider;
    default:
      return kExitValidation;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Query-guided context compression: score context words by trigger-token attention "
               "and keep a budgeted subset."};
  app.name(args.empty() ? "qgc" : args[0]);
  app.require_subcommand(1);

  CompressFlags compress;
  auto* c = app.add_subcommand("compress", "Compress the documents of each JSONL record");
  c->add_option("--input", compress.input, "Input JSONL")->required();
  c->add_option("--output", compress.output, "Output JSONL ('-' for stdout)");
  c->add_option("--ratio", compress.ratio, "Compression ratio R; keeps 1/R of the words (default 2)");
  c->add_option("--mode", compress.mode, "phrase | sentence | dynamic (default phrase)");
  c->add_option("--scope", compress.scope, "per-doc | global (default per-doc)");
  c->add_option("--provider", compress.provider, "ref | recorded:DIR | remote:URL (default ref)");
  c->add_option("--sigma", compress.sigma, "Gaussian sigma in words (default 1)");
  c->add_option("--radius", compress.radius, "Gaussian radius in words (default 3)");
  c->add_option("--seed", compress.seed, "Reference model seed (default 7)");
  c->add_option("--vocab-size", compress.vocab_size, "Reference model vocabulary size");
  c->add_option("--embed-dim", compress.embed_dim, "Reference model embedding width");
  c->add_option("--heads", compress.head_count, "Reference model head count");
  c->add_option("--jobs", compress.jobs, "Records processed in parallel (default 1)");
  c->add_flag("--trace", compress.trace, "Include per-word scores and selection flags");
  compress.prompt.add_to(*c);

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Score predictions against gold records");
  e->add_option("--pred", eval.pred, "Predictions JSONL ({\"id\", \"prediction\"})")->required();
  e->add_option("--gold", eval.gold, "Gold dataset JSONL")->required();
  e->add_option("--metrics", eval.metrics, "Comma list of accuracy, rouge_l, em_recall");
  e->add_option("--output", eval.output, "Report path ('-' for stdout)");

  SweepFlags sweep;
  auto* s = app.add_subcommand("sweep", "Emit copies of each record with the gold document moved");
  s->add_option("--input", sweep.input, "Input JSONL")->required();
  s->add_option("--output", sweep.output, "Output JSONL ('-' for stdout)");
  s->add_option("--positions", sweep.positions, "1-based gold ranks")->delimiter(',');

  GenerateFlags gen;
  auto* g = app.add_subcommand("generate", "Answer each record through an OpenAI-compatible endpoint");
  g->add_option("--input", gen.input, "Input JSONL (compressed or raw)")->required();
  g->add_option("--output", gen.output, "Predictions JSONL ('-' for stdout)");
  g->add_option("--endpoint", gen.endpoint, "Chat completions URL");
  g->add_option("--model", gen.model, "Model name");
  g->add_option("--temperature", gen.temperature, "Sampling temperature (default 0)");
  g->add_option("--max-tokens", gen.max_tokens, "Completion token limit (default 256)");
  g->add_option("--timeout-ms", gen.timeout_ms, "Per-request timeout (default 60000)");
  g->add_option("--max-in-flight", gen.max_in_flight, "Concurrent request cap (default 4)");
  g->add_option("--retries", gen.retries, "Attempts per request (default 3)");
  g->add_option("--backoff-ms", gen.backoff_ms, "Initial retry backoff (default 500)");
  g->add_option("--api-key-env", gen.api_key_env, "Environment variable holding a bearer token");
  g->add_option("--jobs", gen.jobs, "Records processed in parallel (default 1)");
  gen.prompt.add_to(*g);

  PromptsFlags prompts;
  auto* p = app.add_subcommand("prompts", "Emit the filled prompt for every document (for attention recorders)");
  p->add_option("--input", prompts.input, "Input JSONL")->required();
  p->add_option("--output", prompts.output, "Output JSONL ('-' for stdout)");
  prompts.prompt.add_to(*p);

  RecordFlags record;
  auto* r = app.add_subcommand("record", "Write reference-model attention records for every document");
  r->add_option("--input", record.input, "Input JSONL")->required();
  r->add_option("--output-dir", record.output_dir, "Directory for <prompt_sha256>.json files")->required();
  r->add_option("--seed", record.seed, "Reference model seed (default 7)");
  record.prompt.add_to(*r);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (c->parsed()) return do_compress(compress, out);
    if (e->parsed()) return do_eval(eval, out);
    if (s->parsed()) return do_sweep(sweep, out);
    if (g->parsed()) return do_generate(gen, out);
    if (p->parsed()) return do_prompts(prompts, out);
    if (r->parsed()) return do_record(record, out);
  } catch (const Error& ex) {
    err << "error: " << to_string(ex.kind()) << ": " << ex.what() << '\n';
    return exit_code_for(ex);
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace qgc::cli
