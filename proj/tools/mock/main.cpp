#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mock/mock_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Local OpenAI-compatible mock endpoint"};
  int port = 8089;
  std::string script;
  stylespace::mock::Options options;
  app.add_option("--port", port, "Port on 127.0.0.1");
  app.add_option("--script", script, "Comma-separated status codes for the first requests, e.g. 429,429,200");
  app.add_option("--completion", options.completion, "Fixed completion text (default: echo the prompt)");
  app.add_option("--dim", options.embed_dim, "Embedding dimension");
  app.add_option("--token", options.required_token, "Require this bearer token");
  CLI11_PARSE(app, argc, argv);

  std::stringstream ss(script);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) options.script.push_back(std::stoi(item));
  }
  stylespace::mock::Server server(options);
  std::cerr << "listening on http://127.0.0.1:" << port << options.prefix << "\n";
  server.serve_forever(port);
  return 0;
}
