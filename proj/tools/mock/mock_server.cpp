#include "mock_server.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

namespace stylespace::mock {
namespace {

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Server::Server(Options options) : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Server::~Server() { stop(); }

int Server::next_status() {
  std::lock_guard lock(mu_);
  stamps_.push_back(steady_seconds());
  const std::size_t i = served_++;
  return i < options_.script.size() ? options_.script[i] : 200;
}

void Server::install_routes() {
  auto authorized = [this](const httplib::Request& req) {
    if (options_.required_token.empty()) return true;
    return req.get_header_value("Authorization") == "Bearer " + options_.required_token;
  };
  auto fail = [](httplib::Response& res, int status) {
    res.status = status;
    nlohmann::json body = {{"error", {{"message", "scripted failure"}, {"code", status}}}};
    res.set_content(body.dump(), "application/json");
  };

  server_->Post(options_.prefix + "/chat/completions", [=, this](const httplib::Request& req, httplib::Response& res) {
    const int status = next_status();
    if (!authorized(req)) return fail(res, 401);
    if (status != 200) return fail(res, status);
    std::string content = options_.completion;
    if (content.empty()) {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.contains("messages") || body["messages"].empty()) return fail(res, 400);
      content = body["messages"].back().value("content", "");
    }
    nlohmann::json out = {
        {"id", "mock"},
        {"object", "chat.completion"},
        {"choices", nlohmann::json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})}};
    res.set_content(out.dump(), "application/json");
  });

  server_->Post(options_.prefix + "/embeddings", [=, this](const httplib::Request& req, httplib::Response& res) {
    const int status = next_status();
    if (!authorized(req)) return fail(res, 401);
    if (status != 200) return fail(res, status);
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("input") || !body["input"].is_array()) return fail(res, 400);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      const std::string text = body["input"][i].get<std::string>();
      std::size_t dim = options_.embed_dim + ((options_.mismatched_dims && i == 1) ? 1 : 0);
      std::vector<double> v(dim, 0.0);
      for (std::size_t d = 0; d < dim; ++d) v[d] = static_cast<double>((text.size() + 7 * d) % 11) / 10.0;
      data.push_back({{"object", "embedding"}, {"index", i}, {"embedding", v}});
    }
    res.set_content(nlohmann::json{{"object", "list"}, {"data", data}}.dump(), "application/json");
  });
}

int Server::start(int port) {
  port_ = port == 0 ? server_->bind_to_any_port("127.0.0.1") : (server_->bind_to_port("127.0.0.1", port) ? port : -1);
  if (port_ <= 0) throw std::runtime_error("mock server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Server::serve_forever(int port) {
  port_ = port;
  server_->listen("127.0.0.1", port);
}

void Server::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string Server::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + options_.prefix; }

std::size_t Server::requests() const {
  std::lock_guard lock(mu_);
  return served_;
}

std::vector<double> Server::timestamps() const {
  std::lock_guard lock(mu_);
  return stamps_;
}

}  // namespace stylespace::mock
