#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace stylespace::mock {

/// A local OpenAI-compatible endpoint for tests and demos.
///
/// POST {prefix}/chat/completions echoes the last user message (or returns
/// `completion` when set); POST {prefix}/embeddings returns deterministic
/// vectors of `embed_dim` values. `script` lists status codes to return for
/// the first requests, in arrival order; afterwards every request succeeds.
struct Options {
  std::string prefix = "/v1";
  std::vector<int> script;
  std::string completion;
  std::size_t embed_dim = 4;
  bool mismatched_dims = false;  // second embedding row gets one extra value
  std::string required_token;   // when set, other bearer tokens get 401
};

class Server {
 public:
  explicit Server(Options options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds 127.0.0.1 on `port` (0 picks a free one) and serves in the background.
  int start(int port = 0);
  void stop();
  /// Blocks in the calling thread (for the standalone executable).
  void serve_forever(int port);

  std::string base_url() const;
  std::size_t requests() const;
  /// Arrival time of every request, seconds on the steady clock.
  std::vector<double> timestamps() const;

 private:
  void install_routes();
  int next_status();

  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::size_t served_ = 0;
  std::vector<double> stamps_;
};

}  // namespace stylespace::mock
