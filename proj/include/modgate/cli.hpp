#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/corpus.hpp"
#include "modgate/digest.hpp"
#include "modgate/errlab.hpp"
#include "modgate/errors.hpp"
#include "modgate/evalkit.hpp"
#include "modgate/modelgw.hpp"
#include "modgate/promptkit.hpp"
#include "modgate/records.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/text.hpp"

namespace modgate::cli {

// Exit statuses shared by every command.
inline constexpr int kOk = 0;
inline constexpr int kUserError = 1;
inline constexpr int kProviderFailure = 2;

// `base` with its extension replaced (or appended when it has none).
inline std::filesystem::path twin(const std::filesystem::path& base, std::string_view ext) {
  std::filesystem::path p = base;
  p.replace_extension(ext);
  return p;
}

inline std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ProviderError& e) {
    err << "error: " << e.what() << "\n";
    return kProviderFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  }
}

}  // namespace detail

struct PrepareOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path taxonomy;
  std::size_t per_category = 40;
  std::size_t neutral = 1000;
  std::uint64_t seed = 0;
};

inline int cmd_prepare(const PrepareOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Taxonomy tax = load_taxonomy(o.taxonomy);
    Corpus source = load_corpus(o.input, tax);
    Corpus sample = balance_sample(source, o.per_category, o.neutral, o.seed);
    save_corpus(o.output, sample);
    out << "wrote " << sample.size() << " comments to " << o.output.string() << "\n";
    return kOk;
  });
}

struct ClassifyOptions {
  std::filesystem::path corpus;
  std::string prompt;  // version id, or path to a spec file
  std::filesystem::path specs;
  std::filesystem::path taxonomy;
  std::filesystem::path model_config;
  std::optional<std::filesystem::path> cache;
  std::filesystem::path out;
  std::optional<unsigned> concurrency;
  std::optional<std::uint64_t> seed;  // recorded in the manifest only
  // Replaces the provider named by the model config.
  std::shared_ptr<Provider> provider;
};

inline PromptSpec resolve_prompt(const std::string& prompt, const std::filesystem::path& specs,
                                 const Taxonomy& tax) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(prompt, ec)) return load_prompt_spec(prompt, tax);
  SpecStore store = SpecStore::load(specs, tax);
  return store.get(prompt);
}

inline nlohmann::ordered_json config_to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["provider"] = provider_kind_name(cfg.provider);
  j["model_id"] = cfg.model_id;
  if (!cfg.endpoint.empty()) j["endpoint"] = cfg.endpoint;
  j["temperature"] = cfg.temperature;
  j["top_p"] = cfg.top_p;
  j["max_tokens"] = cfg.max_tokens;
  j["request_timeout_ms"] = cfg.request_timeout.count();
  j["max_retries"] = cfg.max_retries;
  j["concurrency_limit"] = cfg.concurrency_limit;
  j["backoff_ms"] = cfg.backoff_base.count();
  if (!cfg.replay_path.empty()) j["replay_path"] = cfg.replay_path.generic_string();
  if (!cfg.script_path.empty()) j["script_path"] = cfg.script_path.generic_string();
  return j;
}

// Stable across re-runs with the same corpus, prompt and model settings.
inline std::string make_run_id(const PromptSpec& spec, const ModelConfig& cfg,
                               const std::string& corpus_digest, const std::string& prompt_digest) {
  std::string model;
  for (char c : cfg.model_id) model += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  std::string h = Sha256()
                      .field(corpus_digest)
                      .field(prompt_digest)
                      .field(request_digest(cfg, ""))
                      .hex();
  return spec.version_id + "-" + model + "-" + h.substr(0, 10);
}

inline int cmd_classify(const ClassifyOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    RunManifest manifest;
    manifest.started_at = utc_now();
    Taxonomy tax = load_taxonomy(o.taxonomy);
    std::string corpus_bytes = read_file(o.corpus);
    manifest.corpus_digest = sha256_hex(corpus_bytes);
    Corpus corpus = parse_corpus(corpus_bytes, tax);
    PromptSpec spec = resolve_prompt(o.prompt, o.specs, tax);
    ModelConfig cfg = load_model_config(o.model_config);
    if (o.concurrency) cfg.concurrency_limit = *o.concurrency;
    cfg.validate();

    // Provider construction checks credentials, so nothing is sent when
    // they are missing.
    std::shared_ptr<Provider> provider = o.provider ? o.provider : make_provider(cfg);
    std::unique_ptr<ResponseCache> cache =
        o.cache ? ResponseCache::open(*o.cache) : std::make_unique<ResponseCache>();

    manifest.prompt_version = spec.version_id;
    manifest.prompt_digest = sha256_hex(render_prompt(spec, ""));
    manifest.run_id = make_run_id(spec, cfg, manifest.corpus_digest, manifest.prompt_digest);
    manifest.corpus_path = o.corpus.generic_string();
    manifest.model = config_to_json(cfg);
    manifest.cache_path = o.cache ? o.cache->generic_string() : "";
    manifest.seed = o.seed ? o.seed : corpus.seed;

    Gateway gw(cfg, provider);
    auto items = gw.classify_batch(spec, corpus, *cache);

    std::size_t transport = 0;
    std::size_t other = 0;
    std::vector<CommentResult> results;
    results.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& c = corpus.comments[i];
      if (!items[i].response) {
        (items[i].transport_failure ? transport : other) += 1;
        if (transport + other <= 5) err << "comment " << c.id << ": " << items[i].error << "\n";
        continue;
      }
      CommentResult r = make_result(c.id, c.gold, items[i].response->content, tax);
      r.prompt_version = spec.version_id;
      r.model_id = cfg.model_id;
      r.from_cache = items[i].response->from_cache;
      results.push_back(std::move(r));
    }
    if (transport + other > 0) {
      err << "error: " << (transport + other) << " of " << items.size()
          << " comments failed; completed responses are cached, re-run to resume\n";
      return transport > 0 ? kProviderFailure : kUserError;
    }

    write_file(o.out, serialize_results(results));
    manifest.comments = results.size();
    manifest.provider_calls = gw.provider_calls();
    manifest.cache_hits = gw.cache_hits();
    manifest.finished_at = utc_now();
    write_file(manifest_path(o.out), manifest_to_json(manifest).dump(2) + "\n");
    out << "classified " << results.size() << " comments (" << gw.cache_hits()
        << " from cache, " << gw.provider_calls() << " provider calls) -> " << o.out.string()
        << "\n";
    return kOk;
  });
}

// Run id from the manifest next to the run file, else the file stem.
inline RunRecord load_run(const std::filesystem::path& run) {
  auto results = load_results(run);
  if (results.empty()) throw Error(run.string() + ": run file has no records");
  std::string run_id = run.stem().string();
  std::error_code ec;
  if (std::filesystem::exists(manifest_path(run), ec)) run_id = load_manifest(manifest_path(run)).run_id;
  return make_run_record(run_id, std::move(results));
}

struct EvaluateOptions {
  std::filesystem::path run;
  std::filesystem::path out;  // writes .json and .txt twins
};

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    RunRecord run = load_run(o.run);
    write_file(twin(o.out, ".json"), evaluation_to_json(run).dump(2) + "\n");
    std::string text = evaluation_to_text(run);
    write_file(twin(o.out, ".txt"), text);
    out << text;
    return kOk;
  });
}

struct CompareOptions {
  std::vector<std::filesystem::path> reports;  // evaluation .json files
  std::filesystem::path out;                   // writes .txt and .csv twins
};

inline int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (o.reports.empty()) throw Error("no evaluation reports given");
    std::vector<RunRecord> runs;
    for (const auto& p : o.reports) {
      auto j = nlohmann::json::parse(read_file(p), nullptr, false);
      if (j.is_discarded()) throw SchemaError(p.string() + ": not JSON");
      runs.push_back(evaluation_from_json(j));
    }
    Comparison cmp = compare_runs(runs);
    std::string text = comparison_to_text(cmp);
    write_file(twin(o.out, ".txt"), text);
    write_file(twin(o.out, ".csv"), comparison_to_csv(cmp));
    out << text;
    return kOk;
  });
}

struct ReportOptions {
  std::filesystem::path run;
  std::filesystem::path out;  // writes .md and .json twins
  std::size_t top = 10;
};

inline int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    RunRecord run = load_run(o.run);
    MisclassificationReport rep = misclassification_report(run, o.top);
    write_file(twin(o.out, ".md"), report_to_markdown(rep));
    write_file(twin(o.out, ".json"), report_to_json(rep).dump(2) + "\n");
    out << "false positives " << rep.false_positives.size() << ", false negatives "
        << rep.false_negatives.size() << " -> " << twin(o.out, ".md").string() << "\n";
    return kOk;
  });
}

}  // namespace modgate::cli
