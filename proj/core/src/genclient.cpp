#include "stylespace/genclient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "parallel.hpp"
#include "stylespace/error.hpp"
#include "stylespace/log.hpp"
#include "stylespace/rng.hpp"

namespace stylespace {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string origin, std::string prefix, double timeout)
      : origin_(std::move(origin)), prefix_(std::move(prefix)), timeout_(timeout) {}

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
    // One client per call: httplib clients are not meant to be shared across threads.
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers h;
    for (const auto& [k, v] : headers) {
      if (k != "Content-Type") h.emplace(k, v);
    }
    auto res = client.Post(prefix_ + path, h, body, "application/json");
    HttpResponse out;
    if (!res) {
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }

 private:
  std::string origin_;
  std::string prefix_;
  double timeout_;
};

std::string trim_ascii(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

OrderedJson SamplingParams::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["temperature"] = temperature;
  j["top_p"] = top_p ? OrderedJson(*top_p) : OrderedJson(nullptr);
  j["max_tokens"] = max_tokens ? OrderedJson(*max_tokens) : OrderedJson(nullptr);
  j["seed"] = seed ? OrderedJson(*seed) : OrderedJson(nullptr);
  return j;
}

SamplingParams SamplingParams::from_json(const Json& json) {
  SamplingParams s;
  try {
    s.temperature = json.at("temperature").get<double>();
    if (json.contains("top_p") && !json["top_p"].is_null()) s.top_p = json["top_p"].get<double>();
    if (json.contains("max_tokens") && !json["max_tokens"].is_null()) s.max_tokens = json["max_tokens"].get<std::size_t>();
    if (json.contains("seed") && !json["seed"].is_null()) s.seed = json["seed"].get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("sampling: ") + e.what());
  }
  return s;
}

void EndpointConfig::validate() const {
  if (base_url.find("://") == std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument, "base_url must include a scheme: '" + base_url + "'", base_url);
  }
  if (model.empty()) throw Error(ErrorKind::kInvalidArgument, "endpoint model must be set");
  if (max_retries < 0) throw Error(ErrorKind::kInvalidArgument, "max_retries must be >= 0");
  if (rpm == 0) throw Error(ErrorKind::kInvalidArgument, "rpm cap must be positive");
  if (!(window_seconds > 0.0)) throw Error(ErrorKind::kInvalidArgument, "rate window must be positive");
  if (!(timeout_seconds > 0.0)) throw Error(ErrorKind::kInvalidArgument, "timeout must be positive");
  if (backoff_base_seconds < 0.0 || backoff_factor < 1.0 || jitter < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "invalid backoff settings");
  }
  if (batch_size == 0) throw Error(ErrorKind::kInvalidArgument, "batch_size must be positive");
}

OrderedJson EndpointConfig::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["base_url"] = base_url;
  j["model"] = model;
  j["token_env"] = token_env;
  j["timeout_seconds"] = timeout_seconds;
  j["max_retries"] = max_retries;
  j["rpm"] = rpm;
  j["window_seconds"] = window_seconds;
  j["backoff_base_seconds"] = backoff_base_seconds;
  j["backoff_factor"] = backoff_factor;
  j["jitter"] = jitter;
  j["batch_size"] = batch_size;
  j["generator"] = generator ? OrderedJson(to_string(*generator)) : OrderedJson(nullptr);
  j["sampling"] = sampling ? sampling->to_json() : OrderedJson(nullptr);
  j["seed"] = seed;
  return j;
}

EndpointConfig EndpointConfig::from_json(const Json& json) {
  EndpointConfig c;
  try {
    c.base_url = json.at("base_url").get<std::string>();
    c.model = json.at("model").get<std::string>();
    c.token_env = json.value("token_env", c.token_env);
    c.timeout_seconds = json.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = json.value("max_retries", c.max_retries);
    c.rpm = json.value("rpm", c.rpm);
    c.window_seconds = json.value("window_seconds", c.window_seconds);
    c.backoff_base_seconds = json.value("backoff_base_seconds", c.backoff_base_seconds);
    c.backoff_factor = json.value("backoff_factor", c.backoff_factor);
    c.jitter = json.value("jitter", c.jitter);
    c.batch_size = json.value("batch_size", c.batch_size);
    c.seed = json.value("seed", c.seed);
    if (json.contains("generator") && !json["generator"].is_null()) {
      c.generator = parse_generator(json["generator"].get<std::string>());
    }
    if (json.contains("sampling") && !json["sampling"].is_null()) c.sampling = SamplingParams::from_json(json["sampling"]);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("endpoint config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string render_prompt(const RewriteJob& job) {
  const std::string& t = job.prompt_template;
  if (t.find("{source}") == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "prompt template lacks {source}", job.job_id);
  if (t.find("{author}") == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "prompt template lacks {author}", job.job_id);
  if (job.target == Author::kTuffery) throw Error(ErrorKind::kInvalidArgument, "rewrite target must be an imitated author", job.job_id);
  std::string out = t;
  // Substitute the author first so a source text containing "{author}" stays verbatim.
  replace_all(out, "{author}", display_name(job.target));
  const std::size_t at = out.find("{source}");
  out.replace(at, 8, job.source.text);
  if (job.style_excerpt) out += "\n\n" + *job.style_excerpt;
  return out;
}

std::vector<RewriteJob> make_rewrite_jobs(const std::vector<Document>& sources, std::string_view prompt_template) {
  std::vector<RewriteJob> jobs;
  for (const auto& s : sources) {
    for (Author a : kTargetAuthors) {
      RewriteJob j;
      j.job_id = s.id + "-" + std::string(to_string(a));
      j.source = s;
      j.target = a;
      j.prompt_template = std::string(prompt_template);
      jobs.push_back(std::move(j));
    }
  }
  return jobs;
}

std::string chat_payload(const EndpointConfig& config, const std::string& prompt) {
  if (!config.sampling) {
    throw Error(ErrorKind::kInvalidArgument, "chat completions need explicit sampling parameters", config.model);
  }
  Json j = Json::object();  // std::map-backed: keys come out sorted
  j["model"] = config.model;
  j["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
  j["temperature"] = config.sampling->temperature;
  if (config.sampling->top_p) j["top_p"] = *config.sampling->top_p;
  if (config.sampling->max_tokens) j["max_tokens"] = *config.sampling->max_tokens;
  if (config.sampling->seed) j["seed"] = *config.sampling->seed;
  j["stream"] = false;
  return j.dump();
}

std::string embedding_payload(const EndpointConfig& config, const std::vector<std::string>& texts) {
  Json j = Json::object();
  j["model"] = config.model;
  j["input"] = texts;
  return j.dump();
}

double SteadyClock::now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void SteadyClock::sleep(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

RateLimiter::RateLimiter(std::size_t cap, double window_seconds, Clock& clock)
    : cap_(cap), window_(window_seconds), clock_(clock) {
  if (cap_ == 0) throw Error(ErrorKind::kInvalidArgument, "rate cap must be positive");
}

void RateLimiter::acquire() {
  for (;;) {
    double wait = 0.0;
    {
      std::lock_guard lock(mu_);
      const double t = clock_.now();
      while (!recent_.empty() && recent_.front() <= t - window_) recent_.pop_front();
      if (recent_.size() < cap_) {
        recent_.push_back(t);
        history_.push_back(t);
        return;
      }
      wait = recent_.front() + window_ - t;
    }
    clock_.sleep(std::max(wait, 1e-3));
  }
}

std::vector<double> RateLimiter::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::shared_ptr<Transport> make_http_transport(const std::string& base_url, double timeout_seconds) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "base_url needs a scheme", base_url);
  const auto path_start = base_url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return std::make_shared<HttpTransport>(std::move(origin), std::move(prefix), timeout_seconds);
}

GenClient::GenClient(EndpointConfig config, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {
  config_.validate();
  if (!transport_) transport_ = make_http_transport(config_.base_url, config_.timeout_seconds);
  if (!clock_) clock_ = std::make_shared<SteadyClock>();
  limiter_ = std::make_unique<RateLimiter>(config_.rpm, config_.window_seconds, *clock_);
  jitter_state_ = Rng::derive(config_.seed, 0x6a17);
}

std::pair<Json, int> GenClient::call(const std::string& path, const std::string& body) {
  std::map<std::string, std::string> headers = {{"Content-Type", "application/json"}};
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
    headers["Authorization"] = std::string("Bearer ") + token;
  }
  const int max_attempts = config_.max_retries + 1;
  HttpResponse last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    limiter_->acquire();
    last = transport_->post(path, body, headers);
    if (last.status >= 200 && last.status < 300) {
      try {
        return {Json::parse(last.body), attempt};
      } catch (const Json::exception& e) {
        throw Error(ErrorKind::kUpstream, "endpoint returned invalid JSON: " + std::string(e.what()), config_.model);
      }
    }
    if (last.status == 401 || last.status == 403) {
      throw Error(ErrorKind::kAuth, "authentication failed (HTTP " + std::to_string(last.status) + ")", config_.model);
    }
    if (!retryable(last.status)) {
      throw Error(ErrorKind::kUpstream, "endpoint rejected the request (HTTP " + std::to_string(last.status) + ")",
                  config_.model);
    }
    if (attempt == max_attempts) break;
    double u;
    {
      std::lock_guard lock(rng_mu_);
      jitter_state_ = Rng::derive(jitter_state_, static_cast<std::uint64_t>(attempt));
      u = static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53;
    }
    const double delay =
        config_.backoff_base_seconds * std::pow(config_.backoff_factor, attempt - 1) * (1.0 + config_.jitter * u);
    log::warn("genclient.retry", {{"model", config_.model},
                                  {"attempt", attempt},
                                  {"status", last.status},
                                  {"delay_seconds", delay}});
    clock_->sleep(delay);
  }
  if (last.status == 0) {
    throw Error(ErrorKind::kTransport,
                "endpoint unreachable after " + std::to_string(max_attempts) + " attempts: " + last.error, config_.model);
  }
  throw Error(ErrorKind::kUpstream,
              "HTTP " + std::to_string(last.status) + " persisted after " + std::to_string(max_attempts) + " attempts",
              config_.model);
}

RewriteResult GenClient::rewrite(const RewriteJob& job) {
  if (!config_.generator) throw Error(ErrorKind::kInvalidArgument, "endpoint config lacks a generator label", config_.model);
  const std::string prompt = render_prompt(job);
  const std::string body = chat_payload(config_, prompt);
  auto [response, attempts] = call("/chat/completions", body);
  std::string text;
  try {
    text = response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kUpstream, "completion lacks choices[0].message.content: " + std::string(e.what()), job.job_id);
  }
  text = trim_ascii(text);
  if (text.empty()) throw Error(ErrorKind::kUpstream, "empty completion", job.job_id);

  RewriteResult r;
  r.job_id = job.job_id;
  r.attempts = attempts;
  r.document.id = job.job_id + "-" + std::string(to_string(*config_.generator));
  r.document.text = std::move(text);
  r.document.label = {CorpusGroup::kStyleGen, job.target, config_.generator};
  r.document.source_id = job.source.id;
  OrderedJson p = OrderedJson::object();
  p["generator"] = to_string(*config_.generator);
  p["endpoint_model"] = config_.model;
  p["prompt_hash"] = hex64(fnv1a64(prompt));
  p["template_hash"] = hex64(fnv1a64(job.prompt_template));
  p["sampling"] = config_.sampling->to_json();
  r.provenance = std::move(p);
  return r;
}

EmbedResult GenClient::embed(const std::vector<std::string>& texts) {
  EmbedResult out;
  if (texts.empty()) return out;
  std::vector<std::vector<double>> rows;
  for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
    const std::size_t end = std::min(texts.size(), start + config_.batch_size);
    const std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                         texts.begin() + static_cast<std::ptrdiff_t>(end));
    auto [response, attempts] = call("/embeddings", embedding_payload(config_, batch));
    (void)attempts;
    try {
      const auto& data = response.at("data");
      if (data.size() != batch.size()) {
        throw Error(ErrorKind::kUpstream, "embedding response has " + std::to_string(data.size()) + " rows for " +
                                              std::to_string(batch.size()) + " inputs", config_.model);
      }
      std::vector<std::vector<double>> ordered(batch.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t idx = data[i].value("index", i);
        if (idx >= batch.size()) throw Error(ErrorKind::kUpstream, "embedding index out of range", config_.model);
        ordered[idx] = data[i].at("embedding").get<std::vector<double>>();
        if (data[i].value("truncated", false)) out.truncated = true;
      }
      if (response.value("truncated", false)) out.truncated = true;
      for (auto& r : ordered) rows.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kUpstream, "malformed embedding response: " + std::string(e.what()), config_.model);
    }
  }
  const std::size_t dim = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "embedding row " + std::to_string(i) + " has dim " + std::to_string(rows[i].size()) + ", expected " +
                      std::to_string(dim),
                  std::to_string(i));
    }
  }
  if (out.truncated) log::warn("genclient.truncated_input", {{"model", config_.model}});
  out.vectors = Matrix(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), out.vectors.row(i).begin());
  return out;
}

std::vector<RewriteResult> run_rewrite_jobs(GenClient& client, const std::vector<RewriteJob>& jobs, std::size_t workers) {
  std::vector<RewriteResult> results(jobs.size());
  detail::parallel_for(jobs.size(), std::max<std::size_t>(workers, 1),
                       [&](std::size_t i) { results[i] = client.rewrite(jobs[i]); });
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.job_id < b.job_id; });
  return results;
}

}  // namespace stylespace
