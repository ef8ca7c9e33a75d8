#include "dense/service/http.hpp"

#include <httplib.h>

#include "dense/core/error.hpp"

namespace dense::service {

using nlohmann::json;

int http_status(const std::string& code) {
  if (code == "BAD_REQUEST") return 400;
  if (code == "UNAUTHENTICATED") return 401;
  if (code == "FORBIDDEN") return 403;
  if (code == "NOT_FOUND") return 404;
  if (code == "CONFLICT") return 409;
  if (code == "UNSUPPORTED_MEDIA") return 415;
  if (code == "STORAGE_UNAVAILABLE" || code == "BLOB_CORRUPT" || code == "IO_ERROR") return 503;
  return 422;
}

struct HttpServer::Impl {
  Service& svc;
  httplib::Server server;

  explicit Impl(Service& s) : svc(s) {}

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const std::string& code, const std::string& detail,
                         const json& context = nullptr) {
    send(res, http_status(code), {{"code", code}, {"detail", detail}, {"context", context},
                                  {"retryable", code == "CONFLICT" || code == "STORAGE_UNAVAILABLE"}});
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error("BAD_REQUEST", "request body is not valid JSON");
    return j;
  }

  using Handler = std::function<json(const Principal&, const httplib::Request&)>;

  httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
    return [this, h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
      const Principal* p = svc.authenticate(req.get_header_value("Authorization"));
      if (!p) return send_error(res, "UNAUTHENTICATED", "missing or unknown bearer token");
      try {
        send(res, ok_status, h(*p, req));
      } catch (const Error& e) {
        send_error(res, e.code(), e.detail(), e.context());
      } catch (const json::exception& e) {
        send_error(res, "BAD_REQUEST", e.what());
      } catch (const std::exception& e) {
        send_error(res, "STORAGE_UNAVAILABLE", e.what());
      }
    };
  }

  static std::string field(const httplib::Request& req, const std::string& key) {
    if (req.has_file(key)) return req.get_file_value(key).content;
    if (req.has_param(key)) return req.get_param_value(key);
    return {};
  }

  void routes() {
    auto& s = server;
    s.Post("/api/tasks", wrap([this](auto& p, auto& req) { return svc.create_task(p, body_of(req)); }, 201));
    s.Get(R"(/api/tasks/([^/]+))", wrap([this](auto& p, auto& req) { return svc.get_task(p, req.matches[1]); }));
    s.Post(R"(/api/tasks/([^/]+)/assignments)",
           wrap([this](auto& p, auto& req) { return svc.assign(p, req.matches[1], body_of(req)); }));
    s.Post("/api/assets", wrap(
                              [this](auto& p, auto& req) {
                                if (!req.has_file("file")) throw Error("BAD_REQUEST", "multipart field 'file' is required");
                                json meta = json::object();
                                const std::string m = field(req, "meta");
                                if (!m.empty()) {
                                  meta = json::parse(m, nullptr, false);
                                  if (!meta.is_object()) throw Error("BAD_REQUEST", "'meta' must be a JSON object");
                                }
                                return svc.upload_asset(p, req.get_file_value("file").content, meta);
                              },
                              201));
    s.Post("/api/sessions", wrap([this](auto& p, auto& req) { return svc.start_session(p, body_of(req)); }, 201));
    s.Get(R"(/api/sessions/([^/]+))", wrap([this](auto& p, auto& req) { return svc.get_session(p, req.matches[1]); }));
    s.Post(R"(/api/sessions/([^/]+)/points)",
           wrap([this](auto& p, auto& req) { return svc.add_point(p, req.matches[1], body_of(req)); }));
    s.Post(R"(/api/sessions/([^/]+)/recordings)",
           wrap(
               [this](auto& p, auto& req) {
                 if (!req.has_file("audio")) throw Error("BAD_REQUEST", "multipart field 'audio' is required");
                 const std::string version = field(req, "version");
                 std::int64_t v = 0;
                 try {
                   std::size_t used = 0;
                   v = std::stoll(version, &used);
                   if (used != version.size()) throw std::invalid_argument("trailing");
                 } catch (const std::logic_error&) {
                   throw Error("BAD_REQUEST", "integer form field 'version' is required");
                 }
                 return svc.add_recording(p, req.matches[1], req.get_file_value("audio").content,
                                          field(req, "target"), v);
               },
               201));
    s.Post(R"(/api/sessions/([^/]+)/unlock-scene)",
           wrap([this](auto& p, auto& req) { return svc.unlock_scene(p, req.matches[1], body_of(req)); }));
    s.Put(R"(/api/sessions/([^/]+)/recordings/([^/]+)/transcript)",
          wrap([this](auto& p, auto& req) {
            return svc.edit_transcript(p, req.matches[1], req.matches[2], body_of(req));
          }));
    s.Post(R"(/api/sessions/([^/]+)/submit)",
           wrap([this](auto& p, auto& req) { return svc.submit(p, req.matches[1], body_of(req)); }));
    s.Post("/api/exports", wrap([this](auto& p, auto& req) { return svc.create_export(p, body_of(req)); }, 202));
    s.Get(R"(/api/exports/([^/]+))", wrap([this](auto& p, auto& req) { return svc.get_export(p, req.matches[1]); }));
    s.set_payload_max_length(512ull << 20);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dense::service
