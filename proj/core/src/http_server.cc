#include "sitrep/http_server.h"

#include <charconv>

#include "httplib.h"
#include "sitrep/error.h"

namespace sitrep {

struct HttpServer::Impl {
  std::shared_ptr<Service> service;
  httplib::Server server;
};

namespace {

void Respond(Service& service, const httplib::Request& req, httplib::Response& res) {
  ApiRequest request;
  request.method = req.method;
  request.path = req.path;
  for (const auto& [key, value] : req.params) request.query.emplace(key, value);
  request.body = req.body;
  const ApiResponse response = service.Handle(request);
  res.status = response.status;
  res.set_header("X-Sitrep-Snapshot", std::to_string(response.version));
  res.set_content(response.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<Service> service) : impl_(std::make_unique<Impl>()) {
  if (!service) throw ConfigError("http server needs a service");
  impl_->service = std::move(service);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    Respond(*impl_->service, req, res);
  };
  impl_->server.Get(R"(/api/.*)", handler);
  impl_->server.Post(R"(/api/.*)", handler);
  impl_->server.Put(R"(/api/.*)", handler);
  impl_->server.Delete(R"(/api/.*)", handler);
}

HttpServer::~HttpServer() { Stop(); }

void HttpServer::Listen(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  }
  Serve();
}

int HttpServer::BindToAnyPort(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw ConfigError("cannot bind an ephemeral port on " + host);
  return port;
}

void HttpServer::Serve() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::is_running() const { return impl_->server.is_running(); }

void HttpServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

std::pair<std::string, int> ParseAddress(const std::string& address) {
  std::string host = "127.0.0.1";
  std::string port_text = address;
  if (const auto colon = address.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = address.substr(0, colon);
    port_text = address.substr(colon + 1);
  }
  int port = 0;
  const auto* end = port_text.data() + port_text.size();
  auto [ptr, ec] = std::from_chars(port_text.data(), end, port);
  if (port_text.empty() || ec != std::errc() || ptr != end || port < 0 || port > 65535) {
    throw ConfigError("invalid listen address '" + address + "'");
  }
  return {host, port};
}

}  // namespace sitrep
