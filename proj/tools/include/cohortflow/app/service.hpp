#pragma once

#include <cohortflow/domain.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace cohortflow::app {

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Request handlers over one immutable model snapshot. Safe to call concurrently.
class ProjectionService {
public:
    explicit ProjectionService(TransitionModel model);

    HttpResponse get_model() const;
    HttpResponse get_states() const;
    HttpResponse post_project(std::string_view body) const;
    HttpResponse healthz() const;

    const TransitionModel& model() const noexcept { return *model_; }

private:
    std::shared_ptr<const TransitionModel> model_;
    std::string model_document_;
};

/// `{"error": {"code": ..., "message": ...}}`
HttpResponse error_response(int status, std::string_view code, std::string_view message);

/// Registers the API routes (and static assets when `static_dir` is set) on `server`.
void mount_routes(httplib::Server& server, const ProjectionService& service,
                  const std::optional<std::filesystem::path>& static_dir);

/// Port precedence: explicit flag, then COHORTFLOW_PORT, then 8080.
/// Throws ArgumentError when the environment value is not a valid port.
int resolve_port(std::optional<int> flag_port);

} // namespace cohortflow::app
