// Project headers pull in Eigen and must precede httplib: <resolv.h> defines a
// `_res` macro that collides with Eigen internals.
#include "threebox/errors.hpp"
#include "threebox/serve.hpp"

#include <httplib.h>

namespace threebox {

using nlohmann::json;

struct HttpServer::Impl {
  Impl(SessionManager& s, std::optional<SessionConfig> d) : sessions(s), default_config(std::move(d)) {}
  SessionManager& sessions;
  std::optional<SessionConfig> default_config;
  httplib::Server server;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const UnknownSession& e) {
    send_error(res, 404, "UnknownSession", e.what());
  } catch (const WrongPhase& e) {
    send_error(res, 409, "WrongPhase", e.what());
  } catch (const ConfigError& e) {
    send_error(res, 400, "InvalidConfig", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "InvalidJson", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

}  // namespace

HttpServer::HttpServer(SessionManager& sessions, std::optional<SessionConfig> default_config)
    : impl_(std::make_unique<Impl>(sessions, std::move(default_config))) {
  auto& srv = impl_->server;
  auto& mgr = impl_->sessions;
  const auto* fallback = &impl_->default_config;

  srv.Post("/sessions", [&mgr, fallback](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (req.body.empty() && !*fallback) throw ConfigError("request body must be a session config");
      const SessionConfig config =
          req.body.empty() ? **fallback : config_from_json(json::parse(req.body));
      const std::string id = mgr.create_session(config);
      send_json(res, 201, {{"session_id", id},
                           {"phase", std::string(to_string(Phase::kAwaitingContext))},
                           {"round_id", 1}});
    });
  });

  srv.Post(R"(/sessions/([^/]+)/context)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      if (!body.is_object() || !body.contains("context") || !body["context"].is_string()) {
        throw ConfigError("body must be {\"context\": \"M1\" | \"M2\" | \"none\"}");
      }
      const Context c = parse_context(body["context"].get<std::string>());
      send_json(res, 200, to_json(mgr.submit_context(req.matches[1], c)));
    });
  });

  srv.Post(R"(/sessions/([^/]+)/reveal)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(mgr.reveal_and_settle(req.matches[1]))); });
  });

  srv.Get(R"(/sessions/([^/]+)/report)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(mgr.session_report(req.matches[1]))); });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace threebox
