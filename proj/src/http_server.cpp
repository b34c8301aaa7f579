#include "httplib.h"
#include "ratesculpt/service.hpp"

namespace ratesculpt {
namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(dump_canonical(body, -1) + "\n", "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    Json j;
    j["error"] = std::string(to_string(code));
    j["message"] = message;
    send_json(res, j, http_status(code));
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, ErrorCode::InvalidInput, e.what());
        } catch (const std::exception& e) {
            send_error(res, ErrorCode::IoError, e.what());
        }
    };
}

Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    auto j = Json::parse(req.body, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::InvalidInput, "request body is not valid JSON");
    return j;
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(ExperimentService& service) {
    auto server = std::make_unique<httplib::Server>();
    server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Headers", "Content-Type"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server->Post(R"(/experiments/([^/]+)/sessions)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.contains("participant_id") || !body["participant_id"].is_string())
            fail(ErrorCode::InvalidInput, "participant_id is required");
        const auto info = service.create_session(req.matches[1], body["participant_id"].get<std::string>());
        send_json(res, session_info_to_json(info), info.resumed ? 200 : 201);
    }));

    server->Get(R"(/sessions/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, session_info_to_json(service.session(req.matches[1])));
    }));

    server->Get(R"(/sessions/([^/]+)/next)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const std::string sid = req.matches[1];
        const auto payload = service.next_trial(sid);
        const auto& exp = service.experiment(service.session(sid).experiment_id);
        send_json(res, trial_payload_to_json(payload, exp.ui));
    }));

    server->Post(R"(/sessions/([^/]+)/responses)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const auto info = service.submit_response(req.matches[1], submission_from_json(parse_body(req)));
        auto j = session_info_to_json(info);
        j["accepted"] = true;
        send_json(res, j);
    }));

    server->Get(R"(/experiments/([^/]+)/export)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        res.set_content(service.export_log(req.matches[1]), "application/x-ndjson");
    }));

    server->Get(R"(/audio/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
        res.set_content(read_text_file(service.audio_path(req.matches[1])), "audio/wav");
    }));

    return server;
}

}  // namespace ratesculpt
