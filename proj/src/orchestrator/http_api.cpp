/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <blockbox/orchestrator/http_api.hpp>

#include <cstdlib>
#include <sys/socket.h>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/orchestrator/calibration.hpp>
#include <blockbox/topology/topology.hpp>

namespace blockbox::orchestrator {

std::uint16_t port_from_environment(std::uint16_t fallback) {
    const char* raw = std::getenv("BLOCKBOX_PORT");
    if (raw == nullptr || *raw == '\0') return fallback;
    char* end = nullptr;
    const long port = std::strtol(raw, &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) {
        spdlog::warn("ignoring BLOCKBOX_PORT='{}'", raw);
        return fallback;
    }
    return static_cast<std::uint16_t>(port);
}

namespace {

    int http_status(ErrorCode code) {
        switch (code) {
            case ErrorCode::not_found: return 404;
            case ErrorCode::rejected: return 409;
            case ErrorCode::invalid_input:
            case ErrorCode::invalid_parameter:
            case ErrorCode::log_corruption: return 400;
            default: return 500;
        }
    }

    void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                    const std::vector<std::string>& violations = {}) {
        nlohmann::json error{{"code", code}, {"message", message}};
        if (!violations.empty()) error["violations"] = violations;
        send_json(res, {{"error", error}}, status);
    }

    nlohmann::json parse_body(const httplib::Request& req) {
        try {
            return nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::invalid_input, std::string{"request body is not JSON: "} + e.what());
        }
    }

    //! Runs a handler, turning exceptions into error responses.
    template <typename Fn>
    httplib::Server::Handler guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, http_status(e.code()), to_string(e.code()), e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    }

    std::string sse(std::string_view event, std::uint64_t id, const nlohmann::json& data) {
        std::string out = "event: " + std::string{event} + "\n";
        if (id > 0) out += "id: " + std::to_string(id) + "\n";
        return out + "data: " + data.dump() + "\n\n";
    }

}  // namespace

ControlServer::ControlServer(Orchestrator& orchestrator)
    : orchestrator_{orchestrator}, server_{std::make_unique<httplib::Server>()} {
    // httplib's default SO_REUSEPORT would let a second server share a busy port.
    server_->set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
}

ControlServer::~ControlServer() { stop(); }

std::uint16_t ControlServer::start(const std::string& host, std::uint16_t port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
    } else if (!server_->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound <= 0) raise(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
    thread_ = std::thread{[this] { server_->listen_after_bind(); }};
    server_->wait_until_ready();
    spdlog::info("control API on http://{}:{}/api", host, bound);
    return static_cast<std::uint16_t>(bound);
}

void ControlServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void ControlServer::stop() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

void ControlServer::routes() {
    auto& s = *server_;
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    s.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) { send_json(res, {{"status", "ok"}}); }));

    s.Post("/api/topology/validate", guarded([](const httplib::Request& req, httplib::Response& res) {
        const auto spec = parse_body(req).get<topology::TopologySpec>();
        auto violations = nlohmann::json::array();
        for (const auto& v : topology::validate(spec)) violations.push_back({{"kind", topology::to_string(v.kind)}, {"detail", v.detail}});
        nlohmann::json body{{"valid", violations.empty()}, {"violations", violations}, {"topology", spec}};
        body["average_shortest_path"] = violations.empty() ? metrics::rational_to_json(topology::average_shortest_path(spec))
                                                           : nlohmann::json(nullptr);
        send_json(res, body);
    }));

    s.Post("/api/calibrate", guarded([](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        try {
            const auto c = calibrate_difficulty(body.at("n").get<std::uint32_t>(), body.at("hashrate").get<double>(),
                                                body.at("target_interval_ms").get<double>());
            send_json(res, {{"difficulty", c.difficulty}, {"warning", c.warning ? nlohmann::json(*c.warning) : nlohmann::json(nullptr)}});
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::invalid_input, e.what());
        }
    }));

    s.Get("/api/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
        auto runs = nlohmann::json::array();
        for (const auto& id : orchestrator_.ids()) {
            const auto r = orchestrator_.record(id);
            runs.push_back({{"id", r.id}, {"name", r.config.name}, {"status", to_string(r.status)}, {"consensus", r.consensus}});
        }
        send_json(res, {{"runs", runs}});
    }));

    s.Post("/api/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto config = config_from_json(parse_body(req));
        if (const auto errors = validate(config); !errors.empty()) {
            send_error(res, 400, to_string(ErrorCode::invalid_input), "experiment config is not runnable", errors);
            return;
        }
        const auto id = orchestrator_.create(config);
        if (req.has_param("start") && req.get_param_value("start") != "false") orchestrator_.start(id);
        send_json(res, summary_json(orchestrator_.record(id)), 201);
    }));

    s.Post("/api/runs/import", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto dir = parse_body(req).value("directory", std::string{});
        if (dir.empty()) raise(ErrorCode::invalid_input, "directory is required");
        const auto id = orchestrator_.import_from(dir);
        send_json(res, summary_json(orchestrator_.record(id)), 201);
    }));

    s.Get(R"(/api/runs/([\w-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, summary_json(orchestrator_.record(req.matches[1])));
    }));

    s.Post(R"(/api/runs/([\w-]+)/start)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        orchestrator_.start(req.matches[1]);
        send_json(res, summary_json(orchestrator_.record(req.matches[1])), 202);
    }));

    s.Post(R"(/api/runs/([\w-]+)/stop)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        orchestrator_.stop(req.matches[1]);
        send_json(res, summary_json(orchestrator_.record(req.matches[1])), 202);
    }));

    s.Get(R"(/api/runs/([\w-]+)/status)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto r = orchestrator_.record(id);
        const auto latest = orchestrator_.latest(id);
        send_json(res, {{"id", id},
                        {"status", to_string(r.status)},
                        {"seq", latest ? latest->first : 0},
                        {"snapshot", latest ? to_json(latest->second) : nlohmann::json(nullptr)}});
    }));

    s.Get(R"(/api/runs/([\w-]+)/metrics)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto r = orchestrator_.record(req.matches[1]);
        if (!r.metrics) raise(ErrorCode::rejected, "run " + r.id + " is " + std::string{to_string(r.status)} + "; metrics exist only for completed runs");
        res.set_content(metrics_file_text(*r.metrics), "application/json");
        if (req.has_param("format") && req.get_param_value("format") == "table") res.set_content(metrics::format_table(*r.metrics), "text/plain");
    }));

    s.Get(R"(/api/runs/([\w-]+)/logs)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto nodes = nlohmann::json::array();
        for (const auto& log : orchestrator_.record(req.matches[1]).logs) nodes.push_back(log.header.node_id);
        send_json(res, {{"nodes", nodes}});
    }));

    s.Get(R"(/api/runs/([\w-]+)/logs/([\w-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto r = orchestrator_.record(req.matches[1]);
        for (const auto& log : r.logs) {
            if (log.header.node_id != req.matches[2]) continue;
            std::ostringstream out;
            node::write_log(out, log);
            res.set_content(out.str(), "application/x-ndjson");
            return;
        }
        raise(ErrorCode::not_found, "run " + r.id + " has no log for '" + std::string{req.matches[2]} + "'");
    }));

    s.Post(R"(/api/runs/([\w-]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto dir = parse_body(req).value("directory", std::string{});
        if (dir.empty()) raise(ErrorCode::invalid_input, "directory is required");
        orchestrator_.export_to(req.matches[1], dir);
        send_json(res, {{"id", req.matches[1]}, {"directory", dir}});
    }));

    s.Get(R"(/api/runs/([\w-]+)/stream)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        (void)orchestrator_.record(id);  // 404 before the stream opens
        auto seq = std::make_shared<std::uint64_t>(0);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, id, seq](std::size_t, httplib::DataSink& sink) {
            if (const auto next = orchestrator_.next_snapshot(id, *seq, kStreamHeartbeat)) {
                *seq = next->first;
                const auto text = sse("status", next->first, to_json(next->second));
                return sink.write(text.data(), text.size());
            }
            const auto r = orchestrator_.record(id);
            if (r.status == RunStatus::completed || r.status == RunStatus::aborted) {
                const auto text = sse("end", 0, summary_json(r));
                sink.write(text.data(), text.size());
                sink.done();
                return true;
            }
            static constexpr std::string_view keepalive = ": keepalive\n\n";
            return sink.write(keepalive.data(), keepalive.size());
        });
    }));
}

}  // namespace blockbox::orchestrator
