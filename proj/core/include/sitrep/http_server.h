#ifndef SITREP_HTTP_SERVER_H_
#define SITREP_HTTP_SERVER_H_

#include <memory>
#include <string>

#include "sitrep/service.h"

namespace sitrep {

// JSON over HTTP in front of a Service. Handlers run on the server's thread
// pool and only read the snapshot they picked up at request start.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Service> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until Stop(). Throws ConfigError when the address cannot be bound.
  void Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; call Serve() to start accepting.
  int BindToAnyPort(const std::string& host);
  void Serve();
  void Stop();
  bool is_running() const;
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "host:port"; a bare port or ":port" binds 127.0.0.1.
std::pair<std::string, int> ParseAddress(const std::string& address);

}  // namespace sitrep

#endif  // SITREP_HTTP_SERVER_H_
