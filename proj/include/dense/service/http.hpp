#pragma once

#include <memory>
#include <string>
#include <thread>

#include "dense/service/service.hpp"

namespace dense::service {

// Status for a domain error code: 400, 401, 403, 404, 409, 415, 422 or 503.
int http_status(const std::string& code);

// JSON-over-HTTP facade for Service. Error bodies are
// {"code", "detail", "context", "retryable"}.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Returns the bound port (an ephemeral one for port 0); -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace dense::service
