#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/io.hpp"
#include "stylespace/matrix.hpp"

namespace stylespace {

/// Sampling fields are always explicit: nothing is left to endpoint defaults.
struct SamplingParams {
  double temperature = 1.0;
  std::optional<double> top_p;
  std::optional<std::size_t> max_tokens;
  std::optional<std::uint64_t> seed;

  OrderedJson to_json() const;
  static SamplingParams from_json(const Json& json);
};

struct EndpointConfig {
  std::string base_url;  // e.g. "https://api.example.com/v1"
  std::string model;
  std::string token_env = "STYLESPACE_API_TOKEN";
  double timeout_seconds = 120.0;
  int max_retries = 5;
  std::size_t rpm = 60;
  double window_seconds = 60.0;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double jitter = 0.25;  // delay *= 1 + jitter * U[0, 1)
  std::size_t batch_size = 64;  // embeddings per request
  std::optional<Generator> generator;  // label stamped on rewrites
  std::optional<SamplingParams> sampling;  // required for chat completions
  std::uint64_t seed = 0;  // backoff jitter stream

  void validate() const;
  /// Never includes the token value, only the variable name.
  OrderedJson to_json() const;
  static EndpointConfig from_json(const Json& json);
};

/// The English rendering of the generation prompt; {source} and {author}
/// are substituted verbatim.
inline constexpr std::string_view kDefaultPromptTemplate =
    "Rewrite this text: \n{source}\n By copying the style of {author}.";

struct RewriteJob {
  std::string job_id;
  Document source;
  Author target = Author::kProust;
  std::string prompt_template{kDefaultPromptTemplate};
  std::optional<std::string> style_excerpt;  // appended as an exemplar when set
};

/// Throws kInvalidArgument when a placeholder is missing or the target is
/// not one of the imitated authors.
std::string render_prompt(const RewriteJob& job);

/// Every Tuffery_ref source crossed with every target author, ids
/// "<source>-<AUTHOR>" in source-then-author order.
std::vector<RewriteJob> make_rewrite_jobs(const std::vector<Document>& sources,
                                          std::string_view prompt_template = kDefaultPromptTemplate);

/// Byte-stable request bodies (keys sorted).
std::string chat_payload(const EndpointConfig& config, const std::string& prompt);
std::string embedding_payload(const EndpointConfig& config, const std::vector<std::string>& texts);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // seconds
  virtual void sleep(double seconds) = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() override;
  void sleep(double seconds) override;
};

/// Sliding-window limiter: at most `cap` acquisitions in any window.
class RateLimiter {
 public:
  RateLimiter(std::size_t cap, double window_seconds, Clock& clock);
  void acquire();
  /// Acquisition times, in order (for audits).
  std::vector<double> history() const;

 private:
  std::size_t cap_;
  double window_;
  Clock& clock_;
  mutable std::mutex mu_;
  std::deque<double> recent_;
  std::vector<double> history_;
};

struct HttpResponse {
  int status = 0;  // 0: transport failure
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const std::map<std::string, std::string>& headers) = 0;
};

/// cpp-httplib transport against `base_url`.
std::shared_ptr<Transport> make_http_transport(const std::string& base_url, double timeout_seconds);

struct RewriteResult {
  std::string job_id;
  Document document;
  OrderedJson provenance;
  int attempts = 0;
};

struct EmbedResult {
  Matrix vectors;
  bool truncated = false;
};

class GenClient {
 public:
  /// `clock` defaults to a steady clock; `transport` to HTTP.
  explicit GenClient(EndpointConfig config, std::shared_ptr<Transport> transport = nullptr,
                     std::shared_ptr<Clock> clock = nullptr);

  RewriteResult rewrite(const RewriteJob& job);
  EmbedResult embed(const std::vector<std::string>& texts);

  const EndpointConfig& config() const { return config_; }
  const RateLimiter& limiter() const { return *limiter_; }

 private:
  /// POST with rate limiting and retries; returns the parsed body and attempts used.
  std::pair<Json, int> call(const std::string& path, const std::string& body);

  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  std::unique_ptr<RateLimiter> limiter_;
  std::mutex rng_mu_;
  std::uint64_t jitter_state_;
};

/// Runs jobs on `workers` threads sharing one client (and its limiter);
/// results come back sorted by job id.
std::vector<RewriteResult> run_rewrite_jobs(GenClient& client, const std::vector<RewriteJob>& jobs,
                                            std::size_t workers = 4);

}  // namespace stylespace
