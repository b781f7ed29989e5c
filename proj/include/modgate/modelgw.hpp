#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/corpus.hpp"
#include "modgate/digest.hpp"
#include "modgate/errors.hpp"
#include "modgate/promptkit.hpp"
#include "modgate/response.hpp"
#include "modgate/text.hpp"

namespace modgate {

enum class ProviderKind { LiveHttp, Replay, Scripted };

inline std::string_view provider_kind_name(ProviderKind k) noexcept {
  switch (k) {
    case ProviderKind::LiveHttp: return "live-http";
    case ProviderKind::Replay: return "replay";
    case ProviderKind::Scripted: return "scripted";
  }
  return "replay";
}

inline constexpr std::string_view kApiKeyEnv = "MODGATE_API_KEY";

struct ModelConfig {
  ProviderKind provider = ProviderKind::Replay;
  std::string model_id;
  std::string endpoint;  // live-http only
  double temperature = 0.1;
  double top_p = 0.9;
  unsigned max_tokens = 150;
  std::chrono::milliseconds request_timeout{30000};
  unsigned max_retries = 3;
  unsigned concurrency_limit = 4;
  std::chrono::milliseconds backoff_base{500};
  std::filesystem::path replay_path;  // replay only
  std::filesystem::path script_path;  // scripted only

  void validate() const {
    if (model_id.empty()) throw ConfigError("model_id is required");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (concurrency_limit < 1) throw ConfigError("concurrency_limit must be >= 1");
    if (provider == ProviderKind::LiveHttp && endpoint.empty()) {
      throw ConfigError("live-http provider needs an endpoint");
    }
    if (provider == ProviderKind::Replay && replay_path.empty()) {
      throw ConfigError("replay provider needs replay_path");
    }
    if (provider == ProviderKind::Scripted && script_path.empty()) {
      throw ConfigError("scripted provider needs script_path");
    }
  }
};

/// Reads `key = value` lines ('#' starts a comment). Relative paths are
/// resolved against `base_dir`.
inline ModelConfig parse_model_config(std::string_view text,
                                      const std::filesystem::path& base_dir = {}) {
  ModelConfig cfg;
  std::size_t lineno = 0;
  auto number = [&](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + key + " is not a number");
    }
  };
  auto count = [&](const std::string& key, const std::string& v) {
    double d = number(key, v);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + key +
                        " must be a non-negative integer");
    }
    return static_cast<unsigned>(d);
  };
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (std::string_view raw : split_lines(text)) {
    ++lineno;
    std::string_view line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key == "provider") {
      if (value == "live-http") cfg.provider = ProviderKind::LiveHttp;
      else if (value == "replay") cfg.provider = ProviderKind::Replay;
      else if (value == "scripted") cfg.provider = ProviderKind::Scripted;
      else throw ConfigError("unknown provider " + value);
    } else if (key == "model_id") {
      cfg.model_id = value;
    } else if (key == "endpoint") {
      cfg.endpoint = value;
    } else if (key == "temperature") {
      cfg.temperature = number(key, value);
    } else if (key == "top_p") {
      cfg.top_p = number(key, value);
    } else if (key == "max_tokens") {
      cfg.max_tokens = count(key, value);
    } else if (key == "request_timeout_ms") {
      cfg.request_timeout = std::chrono::milliseconds(count(key, value));
    } else if (key == "max_retries") {
      cfg.max_retries = count(key, value);
    } else if (key == "concurrency_limit") {
      cfg.concurrency_limit = count(key, value);
    } else if (key == "backoff_ms") {
      cfg.backoff_base = std::chrono::milliseconds(count(key, value));
    } else if (key == "replay_path") {
      cfg.replay_path = path(value);
    } else if (key == "script_path") {
      cfg.script_path = path(value);
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

inline ModelConfig load_model_config(const std::filesystem::path& path) {
  return parse_model_config(read_file(path), path.parent_path());
}

namespace detail {

inline std::string exact_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Cache key: model id, sampling parameters and the exact rendered bytes.
inline std::string request_digest(const ModelConfig& cfg, std::string_view rendered) {
  return Sha256()
      .field(cfg.model_id)
      .field(detail::exact_number(cfg.temperature))
      .field(detail::exact_number(cfg.top_p))
      .field(std::to_string(cfg.max_tokens))
      .field(rendered)
      .hex();
}

/// Thread-safe digest -> content store, optionally persisted as
/// line-delimited `{digest, model_id, content}` records. Concurrent
/// requests for the same missing key share one computation.
class ResponseCache {
 public:
  struct Entry {
    std::string model_id;
    std::string content;
  };

  ResponseCache() = default;
  ResponseCache(const ResponseCache&) = delete;
  ResponseCache& operator=(const ResponseCache&) = delete;

  // Opens (creating if absent) a persistent cache; new entries are appended.
  static std::unique_ptr<ResponseCache> open(const std::filesystem::path& path) {
    auto cache = std::make_unique<ResponseCache>();
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) cache->load_records(read_file(path), path.string());
    cache->path_ = path;
    return cache;
  }

  // Loads a file without ever writing to it.
  static std::unique_ptr<ResponseCache> read_only(const std::filesystem::path& path) {
    auto cache = std::make_unique<ResponseCache>();
    cache->load_records(read_file(path), path.string());
    return cache;
  }

  std::optional<Entry> get(const std::string& digest) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& digest, const std::string& model_id, const std::string& content) {
    std::lock_guard lock(mutex_);
    insert_locked(digest, model_id, content);
  }

  /// Returns the cached content for `digest`, or runs `compute` once and
  /// stores its result. The flag is true when no computation was run by
  /// this call.
  std::pair<std::string, bool> get_or_compute(const std::string& digest,
                                              const std::string& model_id,
                                              const std::function<std::string()>& compute) {
    std::promise<std::string> promise;
    std::shared_future<std::string> pending;
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(digest); it != entries_.end()) return {it->second.content, true};
      if (auto it = in_flight_.find(digest); it != in_flight_.end()) {
        pending = it->second;
      } else {
        in_flight_.emplace(digest, promise.get_future().share());
      }
    }
    if (pending.valid()) return {pending.get(), true};

    try {
      std::string content = compute();
      {
        std::lock_guard lock(mutex_);
        insert_locked(digest, model_id, content);
        in_flight_.erase(digest);
      }
      promise.set_value(content);
      return {std::move(content), false};
    } catch (...) {
      {
        std::lock_guard lock(mutex_);
        in_flight_.erase(digest);
      }
      promise.set_exception(std::current_exception());
      throw;
    }
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  void load_records(const std::string& text, const std::string& origin) {
    std::size_t lineno = 0;
    for (std::string_view line : split_lines(text)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("digest") || !j["digest"].is_string() ||
          !j.contains("content") || !j["content"].is_string()) {
        throw CacheError(origin + ": line " + std::to_string(lineno) + ": malformed cache record");
      }
      entries_[j["digest"].get<std::string>()] =
          Entry{j.value("model_id", std::string()), j["content"].get<std::string>()};
    }
  }

  void insert_locked(const std::string& digest, const std::string& model_id,
                     const std::string& content) {
    auto [it, inserted] = entries_.emplace(digest, Entry{model_id, content});
    if (!inserted || path_.empty()) return;
    nlohmann::ordered_json j;
    j["digest"] = digest;
    j["model_id"] = model_id;
    j["content"] = content;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw CacheError("cannot append to cache " + path_.string());
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    if (!out) throw CacheError("cannot append to cache " + path_.string());
  }

  mutable std::mutex mutex_;
  std::unordered_map<std::string, Entry> entries_;
  std::unordered_map<std::string, std::shared_future<std::string>> in_flight_;
  std::filesystem::path path_;
};

inline std::unique_ptr<ResponseCache> record_replay(const std::filesystem::path& path) {
  return ResponseCache::read_only(path);
}

// Failure worth retrying: throttling, server errors, transport problems.
class TransientError : public ProviderError {
 public:
  TransientError(const std::string& what, int status, bool timeout = false)
      : ProviderError(what, status), timeout_(timeout) {}

  bool timeout() const noexcept { return timeout_; }

 private:
  bool timeout_;
};

struct ProviderRequest {
  const ModelConfig& config;
  const PromptMessages& messages;
  const std::string& digest;
  const std::string& comment_id;
};

class Provider {
 public:
  virtual ~Provider() = default;

  // Returns the model's message content. Throws TransientError for
  // retryable failures and ProviderError otherwise.
  virtual std::string complete(const ProviderRequest& request) = 0;
};

/// Answers from a fixed comment-id -> content table.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::unordered_map<std::string, std::string> script)
      : script_(std::move(script)) {}

  // Line-delimited `{id, content}` records.
  static std::unique_ptr<ScriptedProvider> load(const std::filesystem::path& path) {
    std::unordered_map<std::string, std::string> script;
    std::size_t lineno = 0;
    const std::string text = read_file(path);
    for (std::string_view line : split_lines(text)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id") || !j.contains("content") ||
          !j["id"].is_string() || !j["content"].is_string()) {
        throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                          ": malformed script record");
      }
      script[j["id"].get<std::string>()] = j["content"].get<std::string>();
    }
    return std::make_unique<ScriptedProvider>(std::move(script));
  }

  std::string complete(const ProviderRequest& request) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    auto it = script_.find(request.comment_id);
    if (it == script_.end()) {
      throw ProviderError("scripted provider has no response for comment " + request.comment_id);
    }
    return it->second;
  }

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::unordered_map<std::string, std::string> script_;
  std::atomic<std::size_t> calls_{0};
};

/// Answers only from recorded request digests.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(std::shared_ptr<const ResponseCache> recording)
      : recording_(std::move(recording)) {}

  static std::unique_ptr<ReplayProvider> load(const std::filesystem::path& path) {
    return std::make_unique<ReplayProvider>(record_replay(path));
  }

  std::string complete(const ProviderRequest& request) override {
    auto hit = recording_->get(request.digest);
    if (!hit) throw ReplayMiss(request.digest, request.comment_id);
    return hit->content;
  }

 private:
  std::shared_ptr<const ResponseCache> recording_;
};

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline bool retryable_status(int status) {
  return status == 408 || status == 425 || status == 429 || (status >= 500 && status <= 599);
}

}  // namespace detail

/// Chat-completion style HTTP(S) provider. The API key is read from
/// MODGATE_API_KEY when the provider is built and is only ever sent as a
/// bearer token.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(std::string api_key) : api_key_(std::move(api_key)) {}

  static std::unique_ptr<HttpProvider> from_env() {
    const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError(std::string(kApiKeyEnv) + " is not set");
    }
    return std::make_unique<HttpProvider>(key);
  }

  static std::string request_body(const ProviderRequest& r) {
    nlohmann::ordered_json body;
    body["model"] = r.config.model_id;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "system"}, {"content", r.messages.system}},
         {{"role", "user"}, {"content", r.messages.user}}});
    body["temperature"] = r.config.temperature;
    body["top_p"] = r.config.top_p;
    body["max_tokens"] = r.config.max_tokens;
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  }

  std::string complete(const ProviderRequest& request) override;

 private:
  std::string api_key_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Dispatches prompts through a cache to one provider, retrying transient
/// failures with exponential backoff and jitter.
class Gateway {
 public:
  Gateway(ModelConfig config, std::shared_ptr<Provider> provider,
          Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
      : config_(std::move(config)), provider_(std::move(provider)), sleep_(std::move(sleeper)) {
    config_.validate();
  }

  const ModelConfig& config() const noexcept { return config_; }

  RawResponse classify_one(const PromptSpec& spec, const LabeledComment& comment,
                           ResponseCache& cache) {
    PromptMessages messages = render_messages(spec, comment.text);
    std::string digest = request_digest(config_, messages.joined());

    RawResponse r;
    r.request_digest = digest;
    r.model_id = config_.model_id;
    auto start = std::chrono::steady_clock::now();
    auto [content, cached] = cache.get_or_compute(digest, config_.model_id, [&] {
      return dispatch(ProviderRequest{config_, messages, digest, comment.id}, r.attempt);
    });
    r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    r.content = std::move(content);
    r.from_cache = cached;
    if (cached) {
      r.attempt = 0;
      cache_hits_.fetch_add(1, std::memory_order_relaxed);
    }
    return r;
  }

  struct BatchItem {
    std::optional<RawResponse> response;
    std::string error;  // set when response is empty
    bool transport_failure = false;  // provider/transport/timeout/replay miss
  };

  /// One item per comment, in corpus order. At most concurrency_limit
  /// requests run at once; failures are recorded per item.
  std::vector<BatchItem> classify_batch(const PromptSpec& spec, const Corpus& corpus,
                                        ResponseCache& cache) {
    std::vector<BatchItem> out(corpus.size());
    if (corpus.empty()) return out;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < corpus.size(); i = next.fetch_add(1)) {
        try {
          out[i].response = classify_one(spec, corpus.comments[i], cache);
        } catch (const ProviderError& e) {
          out[i].error = e.what();
          out[i].transport_failure = true;
        } catch (const std::exception& e) {
          out[i].error = e.what();
        }
      }
    };
    std::size_t workers = std::min<std::size_t>(config_.concurrency_limit, corpus.size());
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();  // joins
    return out;
  }

  std::size_t provider_calls() const noexcept { return provider_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::string dispatch(const ProviderRequest& request, unsigned& attempts) {
    // Jitter is seeded from the request digest, so retry timing is
    // reproducible per request.
    std::seed_seq seq(request.digest.begin(), request.digest.end());
    std::mt19937 jitter(seq);
    const unsigned max_attempts = config_.max_retries + 1;
    for (attempts = 1;; ++attempts) {
      provider_calls_.fetch_add(1, std::memory_order_relaxed);
      try {
        return provider_->complete(request);
      } catch (const TransientError& e) {
        if (attempts >= max_attempts) {
          std::string msg = std::string(e.what()) + " (after " + std::to_string(attempts) +
                            " attempts)";
          if (e.timeout()) throw TimeoutError(msg);
          throw ProviderError(msg, e.status());
        }
      }
      auto base = config_.backoff_base.count() << std::min(attempts - 1, 16u);
      auto spread = std::max<std::int64_t>(config_.backoff_base.count(), 1);
      auto delay = base + static_cast<std::int64_t>(jitter() % static_cast<std::uint64_t>(spread));
      sleep_(std::chrono::milliseconds(delay));
    }
  }

  ModelConfig config_;
  std::shared_ptr<Provider> provider_;
  Sleeper sleep_;
  std::atomic<std::size_t> provider_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

inline std::shared_ptr<Provider> make_provider(const ModelConfig& cfg) {
  switch (cfg.provider) {
    case ProviderKind::LiveHttp: return HttpProvider::from_env();
    case ProviderKind::Replay: return ReplayProvider::load(cfg.replay_path);
    case ProviderKind::Scripted: return ScriptedProvider::load(cfg.script_path);
  }
  throw ConfigError("unknown provider");
}

inline RawResponse classify_one(const ModelConfig& config, std::shared_ptr<Provider> provider,
                                const PromptSpec& spec, const LabeledComment& comment,
                                ResponseCache& cache) {
  return Gateway(config, std::move(provider)).classify_one(spec, comment, cache);
}

inline std::vector<Gateway::BatchItem> classify_batch(const ModelConfig& config,
                                                      std::shared_ptr<Provider> provider,
                                                      const PromptSpec& spec, const Corpus& corpus,
                                                      ResponseCache& cache) {
  return Gateway(config, std::move(provider)).classify_batch(spec, corpus, cache);
}

}  // namespace modgate

#include "modgate/http_provider.hpp"
