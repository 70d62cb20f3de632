#include "cohortflow/app/service.hpp"

#include "cohortflow/app/projection.hpp"

#include <cohortflow/ingestion.hpp>
#include <cohortflow/serialization.hpp>

#include <httplib.h>

#include <charconv>
#include <cstdlib>

namespace cohortflow::app {

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    const Json body{{"error", {{"code", code}, {"message", message}}}};
    return {status, body.dump()};
}

ProjectionService::ProjectionService(TransitionModel model)
    : model_{std::make_shared<const TransitionModel>(std::move(model))},
      model_document_{write_model(*model_)} {}

HttpResponse ProjectionService::get_model() const { return {200, model_document_}; }

HttpResponse ProjectionService::get_states() const {
    const StateSpace& space = model_->space();
    const Json body{{"states", space.states()},
                    {"enrolled", space.enrolled()},
                    {"absorbing", space.absorbing()}};
    return {200, body.dump()};
}

HttpResponse ProjectionService::healthz() const { return {200, "ok", "text/plain"}; }

HttpResponse ProjectionService::post_project(std::string_view body) const {
    Json request;
    try {
        request = Json::parse(body);
    } catch (const Json::parse_error& e) {
        return error_response(400, "bad_request", std::string("body is not valid JSON: ") + e.what());
    }
    try {
        if (!request.is_object()) {
            throw ParseError("request body must be a JSON object");
        }
        const auto horizon_it = request.find("horizon");
        if (horizon_it == request.end() || !horizon_it->is_number_integer()) {
            throw ParseError("'horizon' must be an integer");
        }
        const int horizon = horizon_it->get<int>();
        if (horizon < 1 || horizon > kMaxHorizon) {
            throw ParseError("'horizon' must be in [1, " + std::to_string(kMaxHorizon) + "]");
        }

        const auto initial_it = request.find("initial");
        if (initial_it == request.end()) {
            throw ParseError("missing key 'initial'");
        }
        StateVector initial;
        if (initial_it->is_string() && initial_it->get<std::string>() == "from_model_data") {
            initial = initial_from_model(*model_);
        } else if (initial_it->is_object()) {
            std::map<std::string, double> counts;
            for (const auto& [label, value] : initial_it->items()) {
                if (!value.is_number()) {
                    throw ParseError("initial count for '" + label + "' must be a number");
                }
                counts[label] = value.get<double>();
            }
            initial = StateVector::from_labels(model_->space(), counts);
        } else {
            throw ParseError("'initial' must be an object of state -> count or \"from_model_data\"");
        }

        std::optional<ScenarioSpec> scenario;
        if (const auto it = request.find("scenario"); it != request.end() && !it->is_null()) {
            scenario = scenario_from_json(*it, horizon);
        }
        return {200, projection_document(*model_, initial, horizon, scenario).dump()};
    } catch (const ParseError& e) {
        return error_response(400, "bad_request", e.what());
    } catch (const ScenarioError& e) {
        return error_response(422, "invalid_scenario", e.what());
    } catch (const ValidationError& e) {
        return error_response(422, "invalid_input", e.what());
    } catch (const ArgumentError& e) {
        return error_response(400, "bad_request", e.what());
    } catch (const Json::exception& e) {
        return error_response(400, "bad_request", e.what());
    }
}

namespace {

void reply(httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
}

} // namespace

void mount_routes(httplib::Server& server, const ProjectionService& service,
                  const std::optional<std::filesystem::path>& static_dir) {
    server.Get("/healthz", [&service](const httplib::Request&, httplib::Response& res) {
        reply(res, service.healthz());
    });
    server.Get("/api/model", [&service](const httplib::Request&, httplib::Response& res) {
        reply(res, service.get_model());
    });
    server.Get("/api/states", [&service](const httplib::Request&, httplib::Response& res) {
        reply(res, service.get_states());
    });
    server.Post("/api/project", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.post_project(req.body));
    });
    if (static_dir) {
        server.set_mount_point("/", static_dir->string());
    }
    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            reply(res, error_response(500, "internal", message));
        });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const std::string code = res.status == 404 ? "not_found" : "http_error";
            reply(res, error_response(res.status, code, httplib::status_message(res.status)));
        }
    });
}

int resolve_port(std::optional<int> flag_port) {
    if (flag_port) {
        return *flag_port;
    }
    if (const char* env = std::getenv("COHORTFLOW_PORT"); env != nullptr && *env != '\0') {
        const std::string_view text(env);
        int port = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
        if (ec != std::errc{} || ptr != text.data() + text.size() || port < 1 || port > 65535) {
            throw ArgumentError("COHORTFLOW_PORT is not a valid port: '" + std::string(text) + "'");
        }
        return port;
    }
    return 8080;
}

} // namespace cohortflow::app
