#include <fmt/format.h>

#include "httplib.h"
#include "seamcam/error.hpp"
#include "seamcam/service.hpp"

namespace seamcam {

using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownParticipant:
        case ErrorCode::UnknownTrial:
            return 404;
        case ErrorCode::DuplicateVote:
            return 409;
        case ErrorCode::SessionComplete:
            return 410;
        case ErrorCode::InvalidRequest:
        case ErrorCode::ParseError:
            return 400;
        default:
            return 500;
    }
}

void send_json(httplib::Response &res, int status, const json &body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, int status, std::string_view code, const std::string &message) {
    send_json(res, status, json{{"error", code}, {"message", message}});
}

void send_error(httplib::Response &res, const Error &e) {
    send_error(res, http_status(e.code()), to_string(e.code()), e.what());
}

bool operator_authorized(const httplib::Request &req, const std::string &token) {
    if (token.empty()) {
        return false;
    }
    if (req.get_header_value("X-Operator-Token") == token) {
        return true;
    }
    return req.get_header_value("Authorization") == "Bearer " + token;
}

}  // namespace

struct HttpServer::Impl {
    StudyService &service;
    httplib::Server server;

    explicit Impl(StudyService &s) : service(s) {
        server.Get(R"(/api/session/([^/]+)/trial)", [this](const httplib::Request &req, httplib::Response &res) {
            try {
                send_json(res, 200, trial_to_client_json(service.next_trial(req.matches[1].str())));
            } catch (const Error &e) {
                send_error(res, e);
            }
        });

        server.Post("/api/vote", [this](const httplib::Request &req, httplib::Response &res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception &e) {
                send_error(res, 400, to_string(ErrorCode::InvalidRequest), e.what());
                return;
            }
            if (!body.is_object() || !body.contains("trial_id") || !body["trial_id"].is_string() ||
                !body.contains("choice") || !body["choice"].is_string()) {
                send_error(res, 400, to_string(ErrorCode::InvalidRequest), "expected {trial_id, choice, response_ms}");
                return;
            }
            const auto side = parse_side(body["choice"].get<std::string>());
            if (!side) {
                send_error(res, 400, to_string(ErrorCode::InvalidRequest), "choice must be \"left\" or \"right\"");
                return;
            }
            std::optional<double> response_ms;
            if (body.contains("response_ms") && !body["response_ms"].is_null()) {
                if (!body["response_ms"].is_number()) {
                    send_error(res, 400, to_string(ErrorCode::InvalidRequest), "response_ms must be a number");
                    return;
                }
                response_ms = body["response_ms"].get<double>();
            }
            try {
                const auto ack = service.record_vote(body["trial_id"].get<std::string>(), *side, response_ms);
                send_json(res, 200,
                          json{{"trial_id", ack.trial_id}, {"completed", ack.completed}, {"remaining", ack.remaining}});
            } catch (const Error &e) {
                send_error(res, e);
            }
        });

        server.Get("/api/export", [this](const httplib::Request &req, httplib::Response &res) {
            if (!operator_authorized(req, service.config().operator_token)) {
                send_error(res, 403, "Forbidden", "operator token required");
                return;
            }
            res.set_content(service.export_votes().votes_jsonl, "application/x-ndjson");
        });

        server.Get("/api/export/pairs", [this](const httplib::Request &req, httplib::Response &res) {
            if (!operator_authorized(req, service.config().operator_token)) {
                send_error(res, 403, "Forbidden", "operator token required");
                return;
            }
            res.set_content(service.export_votes().pairs_json, "application/json");
        });

        const auto &static_dir = service.config().static_dir;
        if (!static_dir.empty() && !server.set_mount_point("/", static_dir.string())) {
            throw Error(ErrorCode::ConfigError, fmt::format("static_dir '{}' is not a directory", static_dir.string()));
        }
    }
};

HttpServer::HttpServer(StudyService &service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) {
            throw Error(ErrorCode::IoError, fmt::format("cannot bind {}", host));
        }
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::IoError, fmt::format("cannot bind {}:{}", host, port));
    }
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) {
        impl_->server.stop();
    }
}

}  // namespace seamcam
