#include <httplib.h>

#include "socratic/errors.hpp"
#include "socratic/experiment.hpp"
#include "socratic/serialization.hpp"
#include "socratic/service.hpp"

namespace socratic::service {

using nlohmann::json;

int http_status_for(const std::string& code) {
    if (code == "ValidationError" || code == "TemplateError") return 400;
    if (code == "NotFound") return 404;
    if (code == "CycleStillRunning" || code == "SessionClosed") return 409;
    return 500;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
    send_json(res, http_status_for(code), json{{"error", {{"code", code}, {"message", message}}}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const json::exception& e) {
            send_error(res, "ValidationError", std::string("malformed JSON: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, "InternalError", e.what());
        }
    };
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) throw ValidationError("request body must be a JSON object");
    json body = json::parse(req.body);
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    return body;
}

/// Contexts posted over HTTP carry their text inline; file references are
/// refused so a request can never read from the server's disk.
GenerationContext context_from_request(const json& body) {
    const json& ctx = body.contains("context") ? body.at("context") : body;
    if (!ctx.is_object()) throw ValidationError("context must be a JSON object");
    if (ctx.contains("concepts_file")) throw ValidationError("concepts must be sent inline");
    if (ctx.contains("materials") && ctx.at("materials").is_array()) {
        for (const auto& m : ctx.at("materials")) {
            if (!m.is_object() || m.contains("path") || !m.contains("body")) {
                throw ValidationError("each material needs an inline 'body'");
            }
        }
    }
    return load_context(ctx, {});
}

}  // namespace

struct HttpService::Impl {
    SessionManager& manager;
    HttpOptions options;
    httplib::Server server;

    Impl(SessionManager& m, HttpOptions o) : manager(m), options(std::move(o)) {
        server.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        GenerationContext ctx = context_from_request(body);
                        const auto regime = IterationRegime::parse(body.value("regime", std::string{"DYN"}),
                                                                   body.value("cap", kDefaultDynamicCap));
                        send_json(res, 201, to_json(manager.create_session(std::move(ctx), regime)));
                    }));
        server.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
                       json list = json::array();
                       for (const auto& s : manager.list_sessions()) list.push_back(session_summary(s));
                       send_json(res, 200, json{{"sessions", std::move(list)}});
                   }));
        server.Get(R"(/api/sessions/([A-Za-z0-9_-]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, to_json(manager.get_session(req.matches[1])));
                   }));
        server.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/decision)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto decision = TeacherDecision::from_json(parse_body(req));
                        send_json(res, 200, to_json(manager.decide(req.matches[1], decision)));
                    }));
        server.Get(R"(/api/runs/([A-Za-z0-9_-]+)/matrix/([A-Za-z_ ]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto dir = options.runs_dir / std::string(req.matches[1]);
                       if (!std::filesystem::exists(dir / "plan.json")) {
                           throw NotFound("no run '" + std::string(req.matches[1]) + "'");
                       }
                       Criterion criterion{};
                       try {
                           criterion = criterion_from_string(std::string(req.matches[2]));
                       } catch (const ValidationError&) {
                           throw NotFound("no criterion '" + std::string(req.matches[2]) + "'");
                       }
                       for (const auto& m : experiment::load_rq1_matrices(dir)) {
                           if (m.criterion() == criterion) {
                               res.status = 200;
                               res.set_content(analytics::export_matrix(m, analytics::ExportFormat::Json),
                                               "application/json");
                               return;
                           }
                       }
                       throw NotFound("run '" + std::string(req.matches[1]) + "' has no matrix for " +
                                      std::string(slug(criterion)));
                   }));
        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (req.path.rfind("/api/", 0) == 0 && res.body.empty()) {
                send_error(res, res.status == 404 ? "NotFound" : "ValidationError",
                           "no route for " + req.method + " " + req.path);
            }
        });
        if (options.static_dir) {
            if (!server.set_mount_point("/", options.static_dir->string())) {
                throw ValidationError("static directory " + options.static_dir->string() + " does not exist");
            }
        }
    }
};

HttpService::HttpService(SessionManager& manager, HttpOptions options)
    : impl_(std::make_unique<Impl>(manager, std::move(options))) {}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace socratic::service
